#include "embloc/outparse.hpp"

#include <array>
#include <cstdint>

#include "embloc/error.hpp"

namespace embloc {
namespace {

bool is_space(char c) noexcept {
  return c == ' ' || c == '\t' || c == '\n' || c == '\v' || c == '\f' || c == '\r';
}
bool is_digit(char c) noexcept { return c >= '0' && c <= '9'; }

// Integers are kept as saturated values so oversized literals still parse and
// are reported as range violations rather than syntax errors.
constexpr std::uint64_t kSaturated = UINT64_MAX;

class ListScanner {
 public:
  explicit ListScanner(std::string_view text) : s_(text) {}

  /// Tries to read a list starting at the '[' at `start`.
  bool scan(std::size_t start, std::vector<std::array<std::uint64_t, 3>>& tuples) {
    pos_ = start + 1;
    tuples.clear();
    skip_ws();
    if (peek() == ']') return true;
    for (;;) {
      std::array<std::uint64_t, 3> t{};
      if (!eat('(')) return false;
      for (int k = 0; k < 3; ++k) {
        skip_ws();
        if (!read_int(t[k])) return false;
        skip_ws();
        if (!eat(k < 2 ? ',' : ')')) return false;
      }
      tuples.push_back(t);
      skip_ws();
      if (eat(']')) return true;
      if (!eat(',')) return false;
      skip_ws();
    }
  }

 private:
  char peek() const noexcept { return pos_ < s_.size() ? s_[pos_] : '\0'; }
  bool eat(char c) noexcept {
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  void skip_ws() noexcept {
    while (pos_ < s_.size() && is_space(s_[pos_])) ++pos_;
  }
  bool read_int(std::uint64_t& out) noexcept {
    if (pos_ >= s_.size() || !is_digit(s_[pos_])) return false;
    out = 0;
    while (pos_ < s_.size() && is_digit(s_[pos_])) {
      const auto d = static_cast<std::uint64_t>(s_[pos_] - '0');
      out = out > (kSaturated - d) / 10 ? kSaturated : out * 10 + d;
      ++pos_;
    }
    return true;
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

}  // namespace

ParseOutcome try_parse_points(std::string_view text) noexcept {
  ParseOutcome out;
  try {
    ListScanner scanner(text);
    std::vector<std::array<std::uint64_t, 3>> tuples;
    for (std::size_t i = 0; i < text.size(); ++i) {
      if (text[i] != '[' || !scanner.scan(i, tuples)) continue;
      for (std::size_t k = 0; k < tuples.size(); ++k) {
        const auto& t = tuples[k];
        if (t[0] >= kNormalizedGrid || t[1] >= kNormalizedGrid || t[2] > static_cast<std::uint64_t>(INT32_MAX)) {
          out.status = ParseStatus::RangeViolation;
          out.bad_tuple = k;
          out.message = "coordinates outside u,v in [0,1000), Z in [0, 2^31)";
          out.points.clear();
          return out;
        }
        out.points.push_back(
            {static_cast<int>(t[0]), static_cast<int>(t[1]), static_cast<std::int32_t>(t[2])});
      }
      return out;
    }
    out.status = ParseStatus::ParseFailure;
    out.message = "no well-formed point list found";
  } catch (...) {
    out = ParseOutcome{ParseStatus::ParseFailure, {}, std::nullopt, "allocation failure while parsing"};
  }
  return out;
}

PointList parse_points(std::string_view text) {
  ParseOutcome r = try_parse_points(text);
  switch (r.status) {
    case ParseStatus::Ok: return std::move(r.points);
    case ParseStatus::RangeViolation: throw RangeViolationError(*r.bad_tuple, r.message);
    case ParseStatus::ParseFailure: break;
  }
  throw Error(ErrorCode::ParseFailure, r.message);
}

std::string serialize_points(const PointList& points) {
  std::string s = "[";
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (i > 0) s += ", ";
    s += "(" + std::to_string(points[i].u) + ", " + std::to_string(points[i].v) + ", " +
         std::to_string(points[i].z) + ")";
  }
  s += "]";
  return s;
}

}  // namespace embloc
