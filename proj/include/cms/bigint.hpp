#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <string>

namespace cms {

using BigInt = boost::multiprecision::cpp_int;

/// Natural log of a non-negative integer; -inf for zero.
double log_of(const BigInt& value);

inline std::string to_string(const BigInt& value) { return value.str(); }

} // namespace cms
