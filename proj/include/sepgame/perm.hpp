#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>

namespace sepgame {

/// Fractional permission in (0,1]. The full permission 1 is the unit
/// required for writing; it admits no multiple.
class Perm {
 public:
  constexpr Perm() = default;

  /// Returns nullopt unless 0 < num/den <= 1.
  static std::optional<Perm> make(std::int64_t num, std::int64_t den);
  static constexpr Perm full() { return Perm(); }

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }
  bool is_full() const { return num_ == den_; }

  std::string str() const;

  friend bool operator==(const Perm&, const Perm&) = default;
  friend std::strong_ordering operator<=>(const Perm& a, const Perm& b) {
    return a.num_ * b.den_ <=> b.num_ * a.den_;
  }

 private:
  constexpr Perm(std::int64_t num, std::int64_t den) : num_(num), den_(den) {}

  std::int64_t num_ = 1;
  std::int64_t den_ = 1;
};

/// p · p', defined iff p + p' <= 1.
std::optional<Perm> perm_add(Perm a, Perm b);

/// a - b when strictly positive.
std::optional<Perm> perm_sub(Perm a, Perm b);

/// Parses "1", "1/2", "3/4".
std::optional<Perm> parse_perm(const std::string& text);

}  // namespace sepgame
