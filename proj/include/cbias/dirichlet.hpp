#pragma once

/// @file dirichlet.hpp
/// @brief Dirichlet characters mod q, quadratic-residue structure, predicted
/// bias slopes, central L-values and partial Euler products at s = 1/2.

#include "cbias/primes.hpp"
#include "cbias/summation.hpp"

#include <complex>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace cbias::dirichlet {

using primes::u64;
using u32 = std::uint32_t;
using cplx = std::complex<double>;

/// L(1/2, chi) is numerically zero, so the central vanishing order is unknown.
struct CentralZeroError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline constexpr double kCentralZeroThreshold = 1e-8;

struct Generator {
    u64 residue;
    u64 order;
};

/// (Z/qZ)^x as a product of cyclic groups with a discrete-log table.
/// Generators: smallest primitive root per odd prime power, -1 for 4,
/// {-1, 5} for 2^k with k >= 3, lifted by CRT.
class UnitGroup {
public:
    explicit UnitGroup(u64 q);

    u64 modulus() const { return q_; }
    u64 phi() const { return phi_; }
    /// Exponent of the group (lcm of generator orders).
    u64 exponent() const { return exponent_; }
    const std::vector<Generator>& generators() const { return gens_; }
    bool is_unit(u64 a) const { return unit_[a % q_]; }
    /// Exponent vector of a unit; empty span for non-units.
    std::span<const u32> dlog(u64 a) const;
    /// Residue with the given exponent vector.
    u64 element(std::span<const u32> exponents) const;
    std::vector<u64> units() const;

private:
    u64 q_;
    u64 phi_ = 1;
    u64 exponent_ = 1;
    std::vector<Generator> gens_;
    std::vector<char> unit_;
    std::vector<u32> dlog_;  // q_ * gens_.size()
};

/// Throws std::invalid_argument for q < 3.
std::shared_ptr<const UnitGroup> unit_group(u64 q);

/// Character of (Z/qZ)^x. Values are powers of a primitive N-th root of unity,
/// N = exponent of the group; chi(g_i) = e(exponents[i] / order_i).
class DirichletCharacter {
public:
    DirichletCharacter(std::shared_ptr<const UnitGroup> group, std::vector<u32> exponents);

    u64 modulus() const { return group_->modulus(); }
    const UnitGroup& group() const { return *group_; }
    const std::vector<u32>& exponents() const { return exponents_; }
    u64 root_order() const { return group_->exponent(); }

    bool is_principal() const { return principal_; }
    /// chi^2 principal, i.e. all values in {-1, 0, 1}.
    bool is_real() const { return real_; }
    /// 1 for real nonprincipal characters, else 0.
    int nu() const { return (real_ && !principal_) ? 1 : 0; }
    /// Central vanishing order; set to 0 once L(1/2, chi) is certified nonzero.
    std::optional<int> m() const { return m_; }
    void set_m(int m) { m_ = m; }

    /// k with chi(n) = e(k/N); nullopt when gcd(n, q) > 1.
    std::optional<u64> value_index(u64 n) const;
    cplx operator()(u64 n) const;
    /// "q:e1,e2,..."
    std::string label() const;
    /// Smallest d | q such that chi is induced from a character mod d.
    u64 conductor() const;

private:
    std::shared_ptr<const UnitGroup> group_;
    std::vector<u32> exponents_;
    bool principal_ = true;
    bool real_ = true;
    std::optional<int> m_;
};

/// e(k/N) with the four quarter points exact.
cplx root_of_unity(u64 k, u64 n);

/// All phi(q) characters; the principal one first, then lexicographic in exponents.
std::vector<DirichletCharacter> characters(u64 q);

/// Parses "q:e1,e2,..." (std::invalid_argument on malformed or out-of-range input).
DirichletCharacter parse_character(const std::string& label);

/// True iff a is a square of a unit mod q. std::invalid_argument if gcd(a, q) > 1.
bool is_quadratic_residue(u64 a, u64 q);

/// t from the case formula on the number of prime divisors of q.
unsigned t_formula(u64 q);
/// dim_F2 of (Z/qZ)^x / squares from the unit-group structure.
unsigned t_from_group(const UnitGroup& g);
/// Both routes; throws std::logic_error if they disagree.
unsigned t_of_q(u64 q);

struct SlopePrediction {
    double M = 0.0;
    double m = 0.0;
    double total = 0.0;
};

/// Slope C in pi_{1/2,Q}(x) - phi(q) pi_{1/2}(x;q,a) = C loglog x + c.
/// M from the character sum (1/2) sum_{chi != 1} chi(a) nu(chi), checked against
/// the closed form; m = 0 after certifying L(1/2, chi) != 0 for every chi mod q.
/// Throws CentralZeroError when a central value vanishes numerically.
SlopePrediction predict_class_slope(u64 q, u64 a);

/// Same, for every unit a (ascending). Central values are computed once.
std::vector<std::pair<u64, SlopePrediction>> predict_all_class_slopes(u64 q,
                                                                      bool certify_central = true);

/// Slope of pi_{1/2}(x;q,b) - pi_{1/2}(x;q,a): (M(a) - M(b)) / phi(q).
/// Equals 2^{t-1}/phi(q) for a a residue and b a non-residue, 0 for a like pair.
double predict_pair_slope(u64 q, u64 a, u64 b);

/// Hurwitz zeta by Euler-Maclaurin (N = 50, Bernoulli terms through B_16).
/// Domain: 0 < s < 1, 0 < a <= 1; std::invalid_argument otherwise.
double hurwitz_zeta(double s, double a);

/// L(1/2, chi) = q^{-1/2} sum_a chi(a) zeta(1/2, a/q). chi must be nonprincipal.
cplx central_value(const DirichletCharacter& chi);

/// central_value, and sets chi.m = 0 if |L(1/2, chi)| > 1e-8; throws
/// CentralZeroError otherwise.
cplx l_half(DirichletCharacter& chi);

/// Classes = units mod q; primes dividing q excluded.
sums::PrimeClassifier residue_classifier(u64 q);

/// Classes = cosets of the subgroup H of (Z/qZ)^x (H given by its elements; it
/// is closed under multiplication first). Labels are the smallest residue of
/// each coset. Classes of the fixed field of H, i.e. Frobenius classes of the
/// subfield of Q(zeta_q) fixed by H.
sums::PrimeClassifier coset_classifier(u64 q, const std::vector<u64>& subgroup);

/// Predicted slopes for pi_{1/2,Q} - [G:H] pi_{1/2}(x; coset) in the quotient
/// group G/H (abelian formula), one per coset label of coset_classifier.
std::vector<double> coset_slopes(u64 q, const std::vector<u64>& subgroup);

/// Streaming Euler-product accumulator at s = 1/2 for a fixed character.
/// Tracks log-space partial products and the three pieces of the log expansion:
/// sum chi(p)/sqrt p, sum chi(p)^2/(2p), sum_{k=3..64} chi(p)^k/(k p^{k/2}).
class EulerProductAccumulator {
public:
    EulerProductAccumulator(DirichletCharacter chi, primes::CheckpointGrid grid);
    void operator()(u64 p);
    sums::CheckpointSeries finish(u64 stream_limit);

    sums::AccumulatorState save_state() const;
    void load_state(const sums::AccumulatorState& state);

private:
    void snapshot();

    DirichletCharacter chi_;
    primes::CheckpointGrid grid_;
    std::vector<cplx> roots_;
    // log product, k = 1, k = 2, k >= 3; real and imaginary parts each
    std::vector<sums::CompensatedSum> sums_;
    std::vector<std::vector<double>> rows_;
    std::size_t next_ = 0;
    u64 last_ = 0;
};

inline constexpr int kLogExpansionCutoff = 64;

/// Partial products prod_{p<=x} (1 - chi(p)/sqrt p)^{-1} at each checkpoint,
/// plus the log-expansion pieces and the target sqrt(2)^nu L(1/2, chi).
/// Calls l_half first (CentralZeroError if the central value vanishes).
sums::CheckpointSeries partial_euler_product(DirichletCharacter chi,
                                             const primes::CheckpointGrid& grid,
                                             const primes::SieveConfig& config);

/// Adds residual = sum chi(p)/sqrt p + (nu/2 + m) loglog x (real and imaginary
/// parts) to a partial_euler_product series.
sums::CheckpointSeries drh_residual(const sums::CheckpointSeries& euler_series,
                                    const DirichletCharacter& chi);

sums::CheckpointSeries drh_residual(DirichletCharacter chi, const primes::CheckpointGrid& grid,
                                    const primes::SieveConfig& config);

}  // namespace cbias::dirichlet
