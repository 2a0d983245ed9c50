#pragma once

/// @file quadratic.hpp
/// @brief Kronecker splitting in quadratic fields and ideal classes of
/// imaginary quadratic fields via reduced binary quadratic forms.

#include "cbias/dirichlet.hpp"
#include "cbias/primes.hpp"
#include "cbias/summation.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace cbias::quadratic {

using i64 = std::int64_t;
using primes::u64;

/// Kronecker symbol (a/n) for any integers a, n.
int kronecker(i64 a, i64 n);

bool is_fundamental_discriminant(i64 D);
/// Number of distinct primes dividing D.
unsigned prime_divisor_count(i64 D);

enum class SplittingType { Split, Inert, Ramified };
SplittingType splitting_type(i64 D, u64 p);
const char* splitting_name(SplittingType t);

struct BinaryQuadraticForm {
    i64 a = 1, b = 0, c = 1;

    i64 discriminant() const { return b * b - 4 * a * c; }
    bool is_reduced() const;
    /// b = 0, a = b or a = c (reduced forms of order <= 2 in the class group).
    bool is_ambiguous() const;
    /// "a,b,c"
    std::string to_string() const;

    auto operator<=>(const BinaryQuadraticForm&) const = default;
};

/// Reduced form equivalent to f. std::invalid_argument if D >= 0 or a <= 0.
BinaryQuadraticForm reduce_form(BinaryQuadraticForm f);

struct ClassGroup {
    i64 D = 0;
    std::vector<BinaryQuadraticForm> forms;  ///< sorted; the principal form first
    std::size_t principal = 0;
    std::size_t ambiguous = 0;               ///< = |Cl / Cl^2|

    std::size_t h() const { return forms.size(); }
    /// Position of a reduced form; throws std::out_of_range if absent.
    std::size_t index_of(const BinaryQuadraticForm& f) const;
};

/// Reduced forms of discriminant D < 0 (fundamental). std::invalid_argument otherwise.
ClassGroup class_group(i64 D);

/// Square root of a modulo an odd prime p (Tonelli-Shanks); a must be a square.
u64 sqrt_mod_prime(u64 a, u64 p);

struct PrimeIdeal {
    BinaryQuadraticForm form;  ///< reduced form of the ideal class
    u64 norm;
};

/// Prime ideals above p: two of norm p when split (classes C, C^-1), one of
/// norm p^2 in the principal class when inert, one of norm p when ramified.
std::vector<PrimeIdeal> prime_ideal_classes(i64 D, u64 p);

/// The real character mod |D| agreeing with kronecker(D, .).
dirichlet::DirichletCharacter kronecker_character(i64 D);

/// Labels "split", "inert"; ramified primes excluded.
sums::PrimeClassifier splitting_classifier(i64 D);

/// Columns of accumulate_series at s = 1/2 plus
///   nonsplit   = inert + ramified sums,
///   difference = nonsplit - split,
///   prediction = (1/2 + m) loglog x,  residual = difference - prediction.
/// Throws dirichlet::CentralZeroError if L(1/2, (D/.)) vanishes numerically.
sums::CheckpointSeries splitting_bias_series(i64 D, const primes::CheckpointGrid& grid,
                                             const primes::SieveConfig& config);

/// Sums of 1/sqrt N(p) over prime ideals with N(p) <= x, per ideal class
/// ("class:a,b,c") with ideal counts ("count:a,b,c"), then principal,
/// nonprincipal, combo = nonprincipal - (h-1) principal,
/// prediction = (|Cl/Cl^2| - 1)/2 loglog x and residual.
sums::CheckpointSeries principal_bias_series(i64 D, const primes::CheckpointGrid& grid,
                                             const primes::SieveConfig& config);

}  // namespace cbias::quadratic
