#include "sepgame/perm.hpp"

#include <charconv>
#include <numeric>

namespace sepgame {

std::optional<Perm> Perm::make(std::int64_t num, std::int64_t den) {
  if (den <= 0 || num <= 0 || num > den) return std::nullopt;
  const std::int64_t g = std::gcd(num, den);
  return Perm(num / g, den / g);
}

std::string Perm::str() const {
  if (den_ == 1) return std::to_string(num_);
  return std::to_string(num_) + "/" + std::to_string(den_);
}

std::optional<Perm> perm_add(Perm a, Perm b) {
  return Perm::make(a.num() * b.den() + b.num() * a.den(), a.den() * b.den());
}

std::optional<Perm> perm_sub(Perm a, Perm b) {
  return Perm::make(a.num() * b.den() - b.num() * a.den(), a.den() * b.den());
}

namespace {

std::optional<std::int64_t> parse_int(std::string_view s) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

}  // namespace

std::optional<Perm> parse_perm(const std::string& text) {
  const auto slash = text.find('/');
  if (slash == std::string::npos) {
    auto n = parse_int(text);
    if (!n) return std::nullopt;
    return Perm::make(*n, 1);
  }
  auto n = parse_int(std::string_view(text).substr(0, slash));
  auto d = parse_int(std::string_view(text).substr(slash + 1));
  if (!n || !d) return std::nullopt;
  return Perm::make(*n, *d);
}

}  // namespace sepgame
