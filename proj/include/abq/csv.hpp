#pragma once

#include <initializer_list>
#include <string>
#include <string_view>

namespace abq {

/// Shortest round-trip decimal form; "nan", "inf", "-inf" for non-finite
/// values. Locale independent, so output bytes depend only on the value.
std::string csv_number(double value);

/// Appends one comma-separated line to out. Fields are written verbatim.
void append_csv_row(std::string& out, std::initializer_list<std::string_view> fields);

}  // namespace abq
