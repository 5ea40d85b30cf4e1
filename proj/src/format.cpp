#include "agestruct/format.hpp"

#include <array>
#include <charconv>
#include <cmath>

namespace agestruct {

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), res.ptr);
}

void write_csv_row(std::ostream& out, std::span<const double> values) {
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (k) out << ',';
    out << format_double(values[k]);
  }
  out << '\n';
}

}  // namespace agestruct
