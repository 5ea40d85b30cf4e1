#pragma once

#include <ostream>
#include <span>
#include <string>

namespace agestruct {

/// Shortest decimal string that round-trips to the same double. Locale independent.
std::string format_double(double value);

/// Writes one CSV row of doubles using format_double.
void write_csv_row(std::ostream& out, std::span<const double> values);

}  // namespace agestruct
