#pragma once

#include "numeric.hpp"
#include "potential.hpp"
#include "transition_system.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace cms {

enum class SumMethod { BruteForce, RenewalDP, ClosedForm };
const char* method_name(SumMethod m);

/// log Z_n(phi, a) and log Z_n*(phi, a) for n = 1..horizon (index n-1).
struct PartitionSums {
    StateId base = StateId::root();
    std::vector<double> log_z;
    std::vector<double> log_zstar;
    SumMethod method = SumMethod::RenewalDP;
    std::size_t horizon = 0;
};

/// Sums over enumerated periodic points.
PartitionSums partition_sums_bruteforce(const TransitionSystem& system, const Potential& phi, const StateId& base,
                                        std::size_t horizon);
/// Z*_n = w*_n and Z_n = sum_{m<=n} Z*_m Z_{n-m}, Z_0 = 1; input as log w*_n.
PartitionSums partition_sums_renewal(std::span<const double> log_wstar);
/// Same with linear weights; negative weights are rejected.
PartitionSums partition_sums_renewal_linear(std::span<const double> wstar);
/// log of the aggregate loop weight sum_{loops of length n} e^{S_n phi} on a bouquet.
std::vector<double> return_weights(const TransitionSystem& system, const Potential& phi, std::size_t horizon);
/// Exact sums by the cheapest available method: loop algebra on bouquets,
/// transfer DP on finite matrices, enumeration otherwise.
PartitionSums partition_sums(const TransitionSystem& system, const Potential& phi, const StateId& base,
                             std::size_t horizon);

struct PressureEstimate {
    double value = 0.0;
    double uncertainty = 0.0;
    double intercept = 0.0;
    double max_residual = 0.0;
    std::size_t first_n = 0;
    std::size_t last_n = 0;
    bool degenerate = false; // fewer than two non-zero sums: value is -inf
};

/// Linear fit of log Z_n against n over the tail half of the horizon.
PressureEstimate pressure_estimate(const PartitionSums& sums);

enum class Verdict { Holds, Fails, Inconclusive };
const char* verdict_name(Verdict v);

/// sup of periodic Birkhoff averages over periods <= horizon.
double chi_per(const TransitionSystem& system, const Potential& phi, std::size_t horizon);

struct UcsResult {
    Verdict verdict = Verdict::Inconclusive;
    double chi_per = 0.0;
    double pressure = 0.0;
    double tol = 0.0;
};
/// Holds when chi_per < P - tol.
UcsResult ucs_check(double chi_per, double pressure, double tol);

inline constexpr double kSprFitTol = 1e-2;
inline constexpr double kSprClosedFormTol = 1e-6;

struct SprResult {
    Verdict verdict = Verdict::Inconclusive;
    double slope = 0.0;
    double slope_stderr = 0.0;
    double pressure = 0.0;
    double tol = 0.0;
    std::size_t first_n = 0;
    std::size_t last_n = 0;
};

/// Estimates lim (1/n) log Z_n* on the tail half and compares it with P:
/// holds if slope < P - tol, fails if |slope - P| <= tol.
SprResult spr_check(std::span<const double> log_zstar, double pressure, double tol = kSprFitTol);

struct ReturnWord {
    Word word;
    double weight = 0.0;
    bool exact = true;
};

struct InducedSystem {
    StateId base = StateId::root();
    std::size_t max_len = 0;
    std::vector<ReturnWord> words;
    std::vector<bool> exhaustive; // index L-1
};

/// First-return words to `base` of length <= max_len with their induced weights.
InducedSystem induced_system(const TransitionSystem& system, const Potential& phi, const StateId& base,
                             std::size_t max_len, std::size_t cap = 5'000'000);

/// Z*_k = exp(log_scale + k log_ratio).
struct GeometricReturns {
    double log_scale = 0.0;
    double log_ratio = 0.0;
};
/// Z*_k = C k^{-beta} e^{-k rate}.
struct PowerLawReturns {
    double log_c = 0.0;
    double beta = 0.0;
    double rate = 0.0;
};
using ReturnFamily = std::variant<GeometricReturns, PowerLawReturns>;

enum class SeriesStatus { Finite, Infinite, Inconclusive };
const char* status_name(SeriesStatus s);

struct SeriesValue {
    SeriesStatus status = SeriesStatus::Inconclusive;
    double value = 0.0;       // log of the sum when finite
    double error_bound = 0.0; // on `value`
    std::size_t terms = 0;
};

/// log sum_k e^{kp} Z*_k for a closed-form family, with certified tail bounds.
SeriesValue induced_pressure(const ReturnFamily& family, double p, double tol = 1e-13);
/// Same from a finite sequence (index k-1 holds log Z*_k); the tail is
/// extrapolated from a growth fit and reported inconclusive near the boundary.
SeriesValue induced_pressure(std::span<const double> log_zstar, double p);

/// P(phi) of a bouquet from its return family: the root of
/// log sum_k e^{-kP} Z*_k = 0, or -p* when the series stays below 1.
CertifiedValue pressure_from_returns(const ReturnFamily& family);

struct SprBoundary {
    double p_star = 0.0;
    SeriesValue delta; // value at p*; +inf (Infinite) when the series diverges there
};

SprBoundary spr_boundary(const ReturnFamily& family);
SprBoundary spr_boundary(std::span<const double> log_zstar);

enum class RecurrenceKind { Transient, NullRecurrent, PositiveRecurrent, StronglyPositiveRecurrent, Inconclusive };
const char* recurrence_name(RecurrenceKind k);

struct RecurrenceResult {
    RecurrenceKind kind = RecurrenceKind::Inconclusive;
    /// log sum_n e^{-nP} Z*_n; the walk is recurrent iff it equals 0.
    SeriesValue first_return;
    /// log sum_n n e^{-nP} Z*_n; finite iff positive recurrent.
    SeriesValue mean_return;
    std::string evidence;
};

/// Exact classification for the family C n^{-beta} e^{-n rate}.
RecurrenceResult recurrence_classify(const PowerLawReturns& family, double pressure);
RecurrenceResult recurrence_classify(const GeometricReturns& family, double pressure);
/// Partial sums with fitted tails; may come back inconclusive.
RecurrenceResult recurrence_classify(std::span<const double> log_zstar, double pressure);

struct CrcProfile {
    std::uint64_t q = 0;
    std::size_t horizon = 0;
    std::vector<double> s;   // s[n-1] = max S_n phi over paths [<=q] -> [<=q]; -inf if none
    double lambda = 0.0;     // fitted decay rate
    double c = 0.0;          // smallest C with s(n) <= C - n lambda for every n <= horizon
    double pressure = 0.0;
    double margin = 0.0;     // lambda + P: decay rate of S_n(phi - P)
    double tol = 0.0;
    Verdict verdict = Verdict::Inconclusive;
};

/// Holds when lambda_q + P > tol, i.e. the pressure-normalized potential
/// contracts along compact returns.
CrcProfile crc_profile(const TransitionSystem& system, const Potential& phi, std::uint64_t q, std::size_t horizon,
                       double pressure, double tol = 1e-6);

enum class Condition { A, B, C };

struct Witness {
    Word word;
    std::size_t n = 0;
    double sum = 0.0;
};

/// First word (by n, then lexicographically) with S_n phi > C - n eps under
/// the condition's constraint (A: x_n <= q, B: x_0 <= q, C: x_0..x_{n-1} > q).
std::optional<Witness> condition_witness_search(const TransitionSystem& system, const Potential& phi, Condition cond,
                                                std::uint64_t q, double c, double eps, std::size_t horizon);

} // namespace cms
