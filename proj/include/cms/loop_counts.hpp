#pragma once

#include "bigint.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace cms {

/// The loop-count sequence a(n) of a bouquet: the number of simple loops of
/// length n attached at the root.
class LoopCounts {
public:
    enum class Form { Geometric, Ones, List, DoubleExponential };

    /// a(n) = ratio^n, ratio >= 1.
    static LoopCounts geometric(std::uint64_t ratio);
    /// a(n) = 1.
    static LoopCounts ones();
    /// a(n) = values[n-1], zero past the end.
    static LoopCounts list(std::vector<std::uint64_t> values);
    /// a(n) = 2^(2^n).
    static LoopCounts double_exponential();

    /// Same family with a(1) replaced.
    [[nodiscard]] LoopCounts with_first(std::uint64_t a1) const;

    [[nodiscard]] Form form() const noexcept { return form_; }
    [[nodiscard]] std::uint64_t ratio() const noexcept { return ratio_; }
    [[nodiscard]] const std::vector<std::uint64_t>& values() const noexcept { return values_; }
    [[nodiscard]] std::optional<std::uint64_t> first_override() const noexcept { return first_; }

    /// log a(n); -inf when a(n) = 0.
    [[nodiscard]] double log_count(std::uint64_t n) const;
    /// a(n) if it fits in 64 bits.
    [[nodiscard]] std::optional<std::uint64_t> count(std::uint64_t n) const;
    /// a(n) exactly; refuses above 2^20 bits.
    [[nodiscard]] BigInt exact_count(std::uint64_t n) const;
    /// Largest n with a(n) > 0 when the support is finite.
    [[nodiscard]] std::optional<std::uint64_t> support_end() const;

    /// limsup (1/n) log a(n), possibly +-inf.
    [[nodiscard]] double growth_rate() const;
    /// sum_n a(n) e^{-n h}; +inf when the series diverges.
    [[nodiscard]] double generating(double h) const;

    [[nodiscard]] std::string describe() const;

private:
    LoopCounts() = default;

    Form form_ = Form::Ones;
    std::uint64_t ratio_ = 1;
    std::vector<std::uint64_t> values_;
    std::optional<std::uint64_t> first_;
};

} // namespace cms
