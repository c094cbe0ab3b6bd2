#include "cms/state.hpp"

#include "cms/bigint.hpp"
#include "cms/errors.hpp"

#include <charconv>
#include <cmath>
#include <limits>

namespace cms {

double log_of(const BigInt& value)
{
    if (value.is_zero())
        return -std::numeric_limits<double>::infinity();
    const std::size_t bits = boost::multiprecision::msb(value) + 1;
    if (bits <= 60)
        return std::log(value.convert_to<double>());
    const std::size_t shift = bits - 60;
    const BigInt top = value >> shift;
    return std::log(top.convert_to<double>()) + static_cast<double>(shift) * std::log(2.0);
}

std::string to_string(const StateId& s)
{
    switch (s.kind) {
    case StateId::Kind::Root:
        return "r";
    case StateId::Kind::Loop:
        return "v(" + std::to_string(s.loop_len) + "," + std::to_string(s.loop_index) + ","
               + std::to_string(s.position) + ")";
    case StateId::Kind::Plain:
        break;
    }
    return std::to_string(s.index);
}

std::string to_string(const Word& w)
{
    std::string out = "[";
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (i)
            out += ' ';
        out += to_string(w[i]);
    }
    return out + "]";
}

namespace {

std::string_view trim(std::string_view t)
{
    while (!t.empty() && std::isspace(static_cast<unsigned char>(t.front())))
        t.remove_prefix(1);
    while (!t.empty() && std::isspace(static_cast<unsigned char>(t.back())))
        t.remove_suffix(1);
    return t;
}

std::uint64_t parse_number(std::string_view t, std::string_view whole)
{
    t = trim(t);
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc{} || ptr != t.data() + t.size() || t.empty())
        throw DomainError("malformed state '" + std::string(whole) + "'");
    return v;
}

} // namespace

StateId parse_state(std::string_view text)
{
    const std::string_view t = trim(text);
    if (t == "r")
        return StateId::root();
    if (t.size() > 3 && t.substr(0, 2) == "v(" && t.back() == ')') {
        std::string_view inner = t.substr(2, t.size() - 3);
        const auto c1 = inner.find(',');
        const auto c2 = c1 == std::string_view::npos ? c1 : inner.find(',', c1 + 1);
        if (c2 == std::string_view::npos)
            throw DomainError("malformed state '" + std::string(text) + "'");
        return StateId::loop(parse_number(inner.substr(0, c1), text),
                             parse_number(inner.substr(c1 + 1, c2 - c1 - 1), text),
                             parse_number(inner.substr(c2 + 1), text));
    }
    return StateId::plain(parse_number(t, text));
}

} // namespace cms
