#pragma once

#include "cms/state.hpp"

#include <cmath>
#include <initializer_list>
#include <string>
#include <vector>

namespace testing {

inline cms::Word word(std::initializer_list<const char*> states)
{
    cms::Word w;
    for (const char* s : states)
        w.push_back(cms::parse_state(s));
    return w;
}

inline double ln2() { return std::log(2.0); }

// Relative closeness in linear space of two logs.
inline bool close_log(double a, double b, double rel)
{
    if (std::isinf(a) || std::isinf(b))
        return a == b;
    return std::abs(std::expm1(a - b)) <= rel;
}

} // namespace testing
