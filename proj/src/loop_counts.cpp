#include "cms/loop_counts.hpp"

#include "cms/errors.hpp"

#include <cmath>
#include <limits>

namespace cms {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::uint64_t kMaxExactBits = 1u << 20;
} // namespace

LoopCounts LoopCounts::geometric(std::uint64_t ratio)
{
    if (ratio < 1)
        throw DomainError("geometric loop counts need ratio >= 1");
    LoopCounts c;
    c.form_ = ratio == 1 ? Form::Ones : Form::Geometric;
    c.ratio_ = ratio;
    return c;
}

LoopCounts LoopCounts::ones() { return geometric(1); }

LoopCounts LoopCounts::list(std::vector<std::uint64_t> values)
{
    LoopCounts c;
    c.form_ = Form::List;
    c.values_ = std::move(values);
    return c;
}

LoopCounts LoopCounts::double_exponential()
{
    LoopCounts c;
    c.form_ = Form::DoubleExponential;
    c.ratio_ = 2;
    return c;
}

LoopCounts LoopCounts::with_first(std::uint64_t a1) const
{
    LoopCounts c = *this;
    if (c.form_ == Form::List) {
        if (c.values_.empty())
            c.values_.push_back(a1);
        else
            c.values_[0] = a1;
    } else {
        c.first_ = a1;
    }
    return c;
}

std::optional<std::uint64_t> LoopCounts::count(std::uint64_t n) const
{
    if (n == 0)
        return 0;
    if (n == 1 && first_)
        return *first_;
    switch (form_) {
    case Form::Ones:
        return 1;
    case Form::List:
        return n <= values_.size() ? values_[n - 1] : 0;
    case Form::Geometric: {
        std::uint64_t v = 1;
        for (std::uint64_t k = 0; k < n; ++k)
            if (__builtin_mul_overflow(v, ratio_, &v))
                return std::nullopt;
        return v;
    }
    case Form::DoubleExponential:
        if (n >= 6)
            return std::nullopt;
        return std::uint64_t{1} << (std::uint64_t{1} << n);
    }
    return std::nullopt;
}

BigInt LoopCounts::exact_count(std::uint64_t n) const
{
    if (auto c = count(n))
        return BigInt(*c);
    if (form_ == Form::Geometric) {
        if (static_cast<double>(n) * std::log2(static_cast<double>(ratio_)) > kMaxExactBits)
            throw RefusalError("a(" + std::to_string(n) + ") too large to represent", "truncate_len");
        return boost::multiprecision::pow(BigInt(ratio_), static_cast<unsigned>(n));
    }
    if (n > 20)
        throw RefusalError("a(" + std::to_string(n) + ") too large to represent", "truncate_len");
    return BigInt(1) << (std::uint64_t{1} << n);
}

double LoopCounts::log_count(std::uint64_t n) const
{
    if (n == 0)
        return -kInf;
    if (n == 1 && first_)
        return *first_ == 0 ? -kInf : std::log(static_cast<double>(*first_));
    switch (form_) {
    case Form::Ones:
        return 0.0;
    case Form::Geometric:
        return static_cast<double>(n) * std::log(static_cast<double>(ratio_));
    case Form::List: {
        const std::uint64_t v = n <= values_.size() ? values_[n - 1] : 0;
        return v == 0 ? -kInf : std::log(static_cast<double>(v));
    }
    case Form::DoubleExponential:
        return std::ldexp(std::log(2.0), static_cast<int>(std::min<std::uint64_t>(n, 2000)));
    }
    return -kInf;
}

std::optional<std::uint64_t> LoopCounts::support_end() const
{
    if (form_ != Form::List)
        return std::nullopt;
    std::uint64_t last = 0;
    for (std::size_t i = 0; i < values_.size(); ++i)
        if (values_[i] != 0)
            last = i + 1;
    return last;
}

double LoopCounts::growth_rate() const
{
    switch (form_) {
    case Form::Ones:
        return 0.0;
    case Form::Geometric:
        return std::log(static_cast<double>(ratio_));
    case Form::List:
        return -kInf;
    case Form::DoubleExponential:
        return kInf;
    }
    return -kInf;
}

double LoopCounts::generating(double h) const
{
    switch (form_) {
    case Form::List: {
        double s = 0.0;
        for (std::size_t i = 0; i < values_.size(); ++i)
            if (values_[i] != 0)
                s += std::exp(std::log(static_cast<double>(values_[i])) - static_cast<double>(i + 1) * h);
        return s;
    }
    case Form::DoubleExponential:
        return kInf;
    case Form::Ones:
    case Form::Geometric: {
        const double y = static_cast<double>(ratio_) * std::exp(-h);
        if (!(y < 1.0))
            return kInf;
        const double tail = y * y / (1.0 - y); // n >= 2
        const double first = first_ ? static_cast<double>(*first_) * std::exp(-h) : y;
        return first + tail;
    }
    }
    return kInf;
}

std::string LoopCounts::describe() const
{
    std::string s;
    switch (form_) {
    case Form::Ones:
        s = "a(n)=1";
        break;
    case Form::Geometric:
        s = "a(n)=" + std::to_string(ratio_) + "^n";
        break;
    case Form::List:
        s = "a(n) from list of " + std::to_string(values_.size());
        break;
    case Form::DoubleExponential:
        s = "a(n)=2^(2^n)";
        break;
    }
    if (first_)
        s += ", a(1)=" + std::to_string(*first_);
    return s;
}

} // namespace cms
