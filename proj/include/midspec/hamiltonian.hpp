#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "midspec/linalg.hpp"

namespace midspec {

enum class Boundary { kPeriodic, kOpen };

std::string to_string(Boundary b);
Boundary parse_boundary(const std::string& text);

/// A contiguous block of `length` sites on the ring starting at `start`
/// (0-based). May wrap past site N-1.
struct SubsystemSpec {
  std::size_t start = 0;
  std::size_t length = 1;

  void validate(std::size_t n_sites) const;
  bool contains(std::size_t site, std::size_t n_sites) const;
  /// Position of `site` inside the block (0 = leading site).
  std::size_t position(std::size_t site, std::size_t n_sites) const;
};

/// H = sum_i H_i on a chain, term i acting on sites i and i+1 (mod N when
/// periodic). Terms are d^2 x d^2 matrices with site i as the left factor.
class LocalHamiltonian {
 public:
  LocalHamiltonian(std::size_t n_sites, std::size_t local_dim, Boundary boundary,
                   std::vector<ComplexMatrix> terms, bool left_edge_single_site = false);

  std::size_t n_sites() const { return n_sites_; }
  std::size_t local_dim() const { return local_dim_; }
  Boundary boundary() const { return boundary_; }
  std::size_t bond_count() const { return terms_.size(); }
  const ComplexMatrix& term(std::size_t i) const { return terms_[i]; }
  const std::vector<ComplexMatrix>& terms() const { return terms_; }
  std::size_t right_site(std::size_t i) const { return (i + 1) % n_sites_; }
  double operator_norm(std::size_t i) const { return operator_norms_[i]; }

  /// Open chain only: term 0 kept a component acting on site 0 alone, since
  /// there is no earlier term to absorb it.
  bool left_edge_single_site() const { return left_edge_single_site_; }

  /// Nonzero entries (row, value) of column `col` of the assembled Hamiltonian.
  std::vector<std::pair<std::size_t, Complex>> column(std::size_t col) const;

 private:
  std::size_t n_sites_;
  std::size_t local_dim_;
  Boundary boundary_;
  std::vector<ComplexMatrix> terms_;
  std::vector<double> operator_norms_;
  bool left_edge_single_site_;
};

std::size_t bond_count(std::size_t n_sites, Boundary boundary);

struct RawTerm {
  std::size_t site;
  ComplexMatrix matrix;
};

/// Brings arbitrary Hermitian nearest-neighbour terms into canonical form:
/// every term traceless, and no term i carries a component acting on site i
/// alone (such components move into term i-1 as I (x) X). Terms on the same
/// bond are summed. The assembled Hamiltonian is unchanged.
LocalHamiltonian canonicalize(std::size_t n_sites, std::size_t local_dim, Boundary boundary,
                              const std::vector<RawTerm>& raw_terms);

struct ModelSpec {
  std::string name;  // "gue-local", "mfim" or "custom"
  std::size_t n_sites = 0;
  std::size_t local_dim = 2;
  Boundary boundary = Boundary::kPeriodic;
  std::uint64_t seed = 0;
  double coupling = 1.0;
  double transverse_field = 0.9045;
  double longitudinal_field = 0.8090;
  std::string file;  // custom model path
  std::size_t dimension_cap = kDefaultDimensionCap;
  double norm_band_low = 0.5;   // Frobenius band for gue-local terms
  double norm_band_high = 2.0;
};

LocalHamiltonian build_model(const ModelSpec& spec);

/// Custom model text format: header `N d boundary`, then one line per term:
/// the bond index followed by 2*d^4 reals (re/im interleaved, row-major).
LocalHamiltonian read_custom_model(std::istream& in);
void write_custom_model(std::ostream& out, const LocalHamiltonian& h);

/// Full-system matrix of a two-site operator on sites (left, right).
ComplexMatrix embed_two_site(const ComplexMatrix& term, std::size_t left, std::size_t right,
                             std::size_t n_sites, std::size_t local_dim);

ComplexMatrix assemble_dense(const LocalHamiltonian& h,
                             std::size_t dimension_cap = kDefaultDimensionCap);

/// H = H_A + H_Abar + H_boundary for a contiguous subsystem A. h_a acts on A
/// with its sites in block order (start first); h_abar likewise on the
/// complement, whose block starts at start+L. Terms with one leg on each side
/// are listed by bond index in `boundary_terms`.
struct HamiltonianSplit {
  SubsystemSpec subsystem;
  ComplexMatrix h_a;
  ComplexMatrix h_abar;
  std::vector<std::size_t> interior_terms;
  std::vector<std::size_t> complement_terms;
  std::vector<std::size_t> boundary_terms;
};

HamiltonianSplit split_subsystem(const LocalHamiltonian& h, const SubsystemSpec& a,
                                 std::size_t dimension_cap = kDefaultDimensionCap);

/// Just H_A for subsystem `a` (the interior terms, block order).
ComplexMatrix subsystem_hamiltonian(const LocalHamiltonian& h, const SubsystemSpec& a);

/// Rebuilds the full-system matrix (original site order) from a split.
ComplexMatrix reassemble(const LocalHamiltonian& h, const HamiltonianSplit& split,
                         std::size_t dimension_cap = kDefaultDimensionCap);

struct VarianceReport {
  double s2 = 0.0;        // tr(H^2)/d^N, direct
  double s2_a = 0.0;      // tr(H_A^2)/d_A
  double s2_abar = 0.0;   // tr(H_Abar^2)/d_Abar
  std::vector<double> s2_per_term;  // tr(H_i^2)/d^N
};

/// Computes every field both from the assembled operators and from per-term
/// traces; throws InvariantError if the two routes disagree beyond 1e-9.
VarianceReport variance_report(const LocalHamiltonian& h, const SubsystemSpec& a,
                               std::size_t dimension_cap = kDefaultDimensionCap);

/// s_A^2 / s^2 from per-term traces, next to the translation-invariant
/// value (L-1)/N it should match.
struct ConditionReport {
  double ratio = 0.0;
  double expected = 0.0;
  double defect = 0.0;  // |ratio - expected|
};

ConditionReport condition_check(const LocalHamiltonian& h, const SubsystemSpec& a);

/// tr(H_A^r)/d_A for r = 1..r_max from the eigenvalues of h_a.
std::vector<double> moment_report(const ComplexMatrix& h_a, std::size_t r_max);

/// tr(rho H) streamed column by column from the terms.
double energy_expectation(const LocalHamiltonian& h, const ComplexMatrix& rho);

}  // namespace midspec
