#include "midspec/hamiltonian.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "midspec/basis.hpp"
#include "midspec/errors.hpp"
#include "midspec/random.hpp"

namespace midspec {
namespace {

ComplexMatrix pauli_x() { return {{0.0, 1.0}, {1.0, 0.0}}; }
ComplexMatrix pauli_z() { return {{1.0, 0.0}, {0.0, -1.0}}; }

// tr over the right factor of a d^2 x d^2 operator.
ComplexMatrix trace_right(const ComplexMatrix& t, std::size_t d) {
  ComplexMatrix out(d, d);
  for (std::size_t a = 0; a < d; ++a)
    for (std::size_t ap = 0; ap < d; ++ap)
      for (std::size_t c = 0; c < d; ++c) out(a, ap) += t(a * d + c, ap * d + c);
  return out;
}

ComplexMatrix trace_left(const ComplexMatrix& t, std::size_t d) {
  ComplexMatrix out(d, d);
  for (std::size_t c = 0; c < d; ++c)
    for (std::size_t cp = 0; cp < d; ++cp)
      for (std::size_t a = 0; a < d; ++a) out(c, cp) += t(a * d + c, a * d + cp);
  return out;
}

void check_term_shape(const ComplexMatrix& m, std::size_t d, const char* what) {
  if (m.rows() != d * d || m.cols() != d * d) {
    std::ostringstream msg;
    msg << what << ": term is " << m.rows() << "x" << m.cols() << ", expected " << d * d << "x"
        << d * d;
    throw std::invalid_argument(msg.str());
  }
  require_hermitian(m, what);
}

std::vector<std::pair<std::size_t, Complex>> merge_entries(
    std::vector<std::pair<std::size_t, Complex>> entries) {
  std::sort(entries.begin(), entries.end(),
            [](const auto& x, const auto& y) { return x.first < y.first; });
  std::vector<std::pair<std::size_t, Complex>> out;
  for (const auto& e : entries) {
    if (!out.empty() && out.back().first == e.first) {
      out.back().second += e.second;
    } else {
      out.push_back(e);
    }
  }
  return out;
}

// Embeds the listed terms into a block of `block_len` sites. `position`
// maps a chain site to its index inside the block.
template <typename PositionFn>
ComplexMatrix block_operator(const LocalHamiltonian& h, const std::vector<std::size_t>& terms,
                             std::size_t block_len, PositionFn position) {
  const std::size_t d = h.local_dim();
  if (block_len == 0) return ComplexMatrix(1, 1);
  ComplexMatrix out(ipow(d, block_len), ipow(d, block_len));
  for (std::size_t i : terms) {
    out += embed_two_site(h.term(i), position(i), position(h.right_site(i)), block_len, d);
  }
  return out;
}

}  // namespace

std::string to_string(Boundary b) { return b == Boundary::kPeriodic ? "periodic" : "open"; }

Boundary parse_boundary(const std::string& text) {
  if (text == "periodic" || text == "pbc") return Boundary::kPeriodic;
  if (text == "open" || text == "obc") return Boundary::kOpen;
  throw std::invalid_argument("unknown boundary '" + text + "' (expected periodic or open)");
}

void SubsystemSpec::validate(std::size_t n_sites) const {
  if (length < 1 || length > n_sites) {
    std::ostringstream msg;
    msg << "subsystem length " << length << " must lie in [1, " << n_sites << "]";
    throw std::invalid_argument(msg.str());
  }
  if (start >= n_sites) {
    std::ostringstream msg;
    msg << "subsystem start " << start << " must be below " << n_sites;
    throw std::invalid_argument(msg.str());
  }
}

bool SubsystemSpec::contains(std::size_t site, std::size_t n_sites) const {
  return (site + n_sites - start) % n_sites < length;
}

std::size_t SubsystemSpec::position(std::size_t site, std::size_t n_sites) const {
  return (site + n_sites - start) % n_sites;
}

std::size_t bond_count(std::size_t n_sites, Boundary boundary) {
  return boundary == Boundary::kPeriodic ? n_sites : n_sites - 1;
}

LocalHamiltonian::LocalHamiltonian(std::size_t n_sites, std::size_t local_dim, Boundary boundary,
                                   std::vector<ComplexMatrix> terms, bool left_edge_single_site)
    : n_sites_(n_sites),
      local_dim_(local_dim),
      boundary_(boundary),
      terms_(std::move(terms)),
      left_edge_single_site_(left_edge_single_site) {
  if (local_dim_ < 2) throw std::invalid_argument("LocalHamiltonian: local dimension must be >= 2");
  if (n_sites_ < 2) throw std::invalid_argument("LocalHamiltonian: need at least 2 sites");
  if (boundary_ == Boundary::kPeriodic && n_sites_ < 3) {
    throw std::invalid_argument("LocalHamiltonian: periodic chains need at least 3 sites");
  }
  if (terms_.size() != midspec::bond_count(n_sites_, boundary_)) {
    std::ostringstream msg;
    msg << "LocalHamiltonian: " << terms_.size() << " terms given, chain has "
        << midspec::bond_count(n_sites_, boundary_) << " bonds";
    throw std::invalid_argument(msg.str());
  }
  operator_norms_.reserve(terms_.size());
  for (const auto& t : terms_) {
    check_term_shape(t, local_dim_, "LocalHamiltonian");
    if (std::abs(t.trace()) > 1e-10 * (1.0 + t.max_abs())) {
      throw std::invalid_argument("LocalHamiltonian: terms must be traceless");
    }
    const auto ev = hermitian_eigenvalues(t);
    operator_norms_.push_back(std::max(std::abs(ev.front()), std::abs(ev.back())));
  }
}

std::vector<std::pair<std::size_t, Complex>> LocalHamiltonian::column(std::size_t col) const {
  const std::size_t d = local_dim_;
  std::vector<std::pair<std::size_t, Complex>> entries;
  entries.reserve(terms_.size() * d * d);
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    const std::size_t wl = ipow(d, n_sites_ - 1 - i);
    const std::size_t wr = ipow(d, n_sites_ - 1 - right_site(i));
    const std::size_t a = (col / wl) % d;
    const std::size_t c = (col / wr) % d;
    const std::size_t rest = col - a * wl - c * wr;
    const ComplexMatrix& t = terms_[i];
    for (std::size_t ap = 0; ap < d; ++ap) {
      for (std::size_t cp = 0; cp < d; ++cp) {
        const Complex v = t(ap * d + cp, a * d + c);
        if (v != Complex{}) entries.emplace_back(rest + ap * wl + cp * wr, v);
      }
    }
  }
  return merge_entries(std::move(entries));
}

LocalHamiltonian canonicalize(std::size_t n_sites, std::size_t local_dim, Boundary boundary,
                              const std::vector<RawTerm>& raw_terms) {
  if (n_sites < 2) throw std::invalid_argument("canonicalize: need at least 2 sites");
  const std::size_t d = local_dim;
  const std::size_t bonds = bond_count(n_sites, boundary);
  std::vector<ComplexMatrix> summed(bonds, ComplexMatrix(d * d, d * d));
  for (const auto& raw : raw_terms) {
    if (raw.site >= bonds) {
      std::ostringstream msg;
      msg << "canonicalize: term on bond " << raw.site << " but chain has " << bonds << " bonds";
      throw std::invalid_argument(msg.str());
    }
    check_term_shape(raw.matrix, d, "canonicalize");
    summed[raw.site] += raw.matrix;
  }

  const ComplexMatrix id = ComplexMatrix::identity(d);
  std::vector<ComplexMatrix> out = summed;
  bool left_edge = false;
  for (std::size_t i = 0; i < bonds; ++i) {
    const Complex mean = summed[i].trace() / static_cast<double>(d * d);
    ComplexMatrix left = trace_right(summed[i], d) * (1.0 / static_cast<double>(d)) - id * mean;
    out[i] -= ComplexMatrix::identity(d * d) * mean;
    const bool has_pred = i > 0 || boundary == Boundary::kPeriodic;
    if (has_pred) {
      out[i] -= kron(left, id);
      out[(i + bonds - 1) % bonds] += kron(id, left);
    } else if (left.max_abs() > 0.0) {
      left_edge = true;
    }
  }
  // Exact Hermitian symmetry and zero trace after floating-point arithmetic.
  for (auto& t : out) {
    for (std::size_t r = 0; r < t.rows(); ++r) {
      t(r, r) = t(r, r).real();
      for (std::size_t c = r + 1; c < t.cols(); ++c) {
        const Complex avg = 0.5 * (t(r, c) + std::conj(t(c, r)));
        t(r, c) = avg;
        t(c, r) = std::conj(avg);
      }
    }
  }
  return LocalHamiltonian(n_sites, d, boundary, std::move(out), left_edge);
}

LocalHamiltonian build_model(const ModelSpec& spec) {
  if (spec.n_sites < 2) {
    throw std::invalid_argument("build_model: n_sites must be at least 2");
  }
  checked_pow(spec.local_dim, spec.n_sites, spec.dimension_cap);
  const std::size_t d = spec.local_dim;
  const std::size_t bonds = bond_count(spec.n_sites, spec.boundary);

  LocalHamiltonian h = [&]() {
    if (spec.name == "gue-local") {
      Rng rng(derive_seed(spec.seed, StreamKind::kModel, 0));
      std::vector<RawTerm> raw;
      const double variance = 1.0 / static_cast<double>(d * d * d * d);
      for (std::size_t i = 0; i < bonds; ++i) raw.push_back({i, gue_matrix(d * d, variance, rng)});
      LocalHamiltonian canon = canonicalize(spec.n_sites, d, spec.boundary, raw);
      std::vector<ComplexMatrix> terms = canon.terms();
      for (auto& t : terms) {
        const double norm = std::sqrt(t.frobenius_norm_squared());
        if (norm > 0.0 && norm < spec.norm_band_low) t *= spec.norm_band_low / norm;
        if (norm > spec.norm_band_high) t *= spec.norm_band_high / norm;
      }
      return LocalHamiltonian(spec.n_sites, d, spec.boundary, std::move(terms),
                              canon.left_edge_single_site());
    }
    if (spec.name == "mfim") {
      if (d != 2) throw std::invalid_argument("build_model: mfim requires local_dim = 2");
      const ComplexMatrix id = ComplexMatrix::identity(2);
      const ComplexMatrix field = pauli_x() * spec.transverse_field +
                                  pauli_z() * spec.longitudinal_field;
      std::vector<RawTerm> raw;
      for (std::size_t i = 0; i < bonds; ++i) {
        // Each bond carries the field on its right site.
        raw.push_back({i, kron(pauli_z(), pauli_z()) * spec.coupling + kron(id, field)});
      }
      if (spec.boundary == Boundary::kOpen) raw.push_back({0, kron(field, id)});
      return canonicalize(spec.n_sites, d, spec.boundary, raw);
    }
    if (spec.name == "custom") {
      if (spec.file.empty()) throw std::invalid_argument("build_model: custom model needs a file");
      std::ifstream in(spec.file);
      if (!in) throw std::invalid_argument("build_model: cannot open model file '" + spec.file + "'");
      LocalHamiltonian custom = read_custom_model(in);
      if (custom.n_sites() != spec.n_sites || custom.local_dim() != d ||
          custom.boundary() != spec.boundary) {
        std::ostringstream msg;
        msg << "build_model: model file declares N=" << custom.n_sites()
            << " d=" << custom.local_dim() << " " << to_string(custom.boundary())
            << ", configuration expects N=" << spec.n_sites << " d=" << d << " "
            << to_string(spec.boundary);
        throw std::invalid_argument(msg.str());
      }
      return custom;
    }
    throw std::invalid_argument("build_model: unknown model '" + spec.name +
                                "' (expected gue-local, mfim or custom)");
  }();

  for (std::size_t i = 0; i < h.bond_count(); ++i) {
    if (h.term(i).max_abs() == 0.0) {
      std::ostringstream msg;
      msg << "build_model: term " << i << " vanishes after canonicalization";
      throw std::invalid_argument(msg.str());
    }
  }
  return h;
}

LocalHamiltonian read_custom_model(std::istream& in) {
  auto parse_double = [](const std::string& tok) {
    double v = 0.0;
    const char* first = tok.data();
    const char* last = tok.data() + tok.size();
    if (!tok.empty() && *first == '+') ++first;
    const auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc() || res.ptr != last) {
      throw std::invalid_argument("model file: cannot parse number '" + tok + "'");
    }
    return v;
  };
  auto parse_count = [](const std::string& tok) {
    std::size_t v = 0;
    const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc() || res.ptr != tok.data() + tok.size()) {
      throw std::invalid_argument("model file: cannot parse integer '" + tok + "'");
    }
    return v;
  };

  std::string line;
  std::vector<std::string> header;
  while (header.empty() && std::getline(in, line)) {
    std::istringstream ls(line);
    for (std::string tok; ls >> tok;) header.push_back(tok);
  }
  if (header.size() != 3) {
    throw std::invalid_argument("model file: header must be 'N d boundary'");
  }
  const std::size_t n = parse_count(header[0]);
  const std::size_t d = parse_count(header[1]);
  const Boundary boundary = parse_boundary(header[2]);
  if (d < 2 || n < 2) throw std::invalid_argument("model file: need N >= 2 and d >= 2");

  const std::size_t dd = d * d;
  std::vector<RawTerm> raw;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::vector<std::string> toks;
    for (std::string tok; ls >> tok;) toks.push_back(tok);
    if (toks.empty()) continue;
    if (toks.size() != 1 + 2 * dd * dd) {
      std::ostringstream msg;
      msg << "model file line " << line_no << ": expected " << 1 + 2 * dd * dd << " fields, got "
          << toks.size();
      throw std::invalid_argument(msg.str());
    }
    ComplexMatrix m(dd, dd);
    for (std::size_t k = 0; k < dd * dd; ++k) {
      m.data()[k] = Complex(parse_double(toks[1 + 2 * k]), parse_double(toks[2 + 2 * k]));
    }
    raw.push_back({parse_count(toks[0]), std::move(m)});
  }
  return canonicalize(n, d, boundary, raw);
}

void write_custom_model(std::ostream& out, const LocalHamiltonian& h) {
  char buf[64];
  out << h.n_sites() << ' ' << h.local_dim() << ' ' << to_string(h.boundary()) << '\n';
  for (std::size_t i = 0; i < h.bond_count(); ++i) {
    out << i;
    for (const Complex& z : h.term(i).data()) {
      auto res = std::to_chars(buf, buf + sizeof buf, z.real(), std::chars_format::general, 17);
      out << ' ' << std::string_view(buf, static_cast<std::size_t>(res.ptr - buf));
      res = std::to_chars(buf, buf + sizeof buf, z.imag(), std::chars_format::general, 17);
      out << ' ' << std::string_view(buf, static_cast<std::size_t>(res.ptr - buf));
    }
    out << '\n';
  }
}

ComplexMatrix embed_two_site(const ComplexMatrix& term, std::size_t left, std::size_t right,
                             std::size_t n_sites, std::size_t local_dim) {
  const std::size_t d = local_dim;
  const std::size_t dim = ipow(d, n_sites);
  const std::size_t wl = ipow(d, n_sites - 1 - left);
  const std::size_t wr = ipow(d, n_sites - 1 - right);
  ComplexMatrix out(dim, dim);
  for (std::size_t col = 0; col < dim; ++col) {
    const std::size_t a = (col / wl) % d;
    const std::size_t c = (col / wr) % d;
    const std::size_t rest = col - a * wl - c * wr;
    for (std::size_t ap = 0; ap < d; ++ap) {
      for (std::size_t cp = 0; cp < d; ++cp) {
        out(rest + ap * wl + cp * wr, col) += term(ap * d + cp, a * d + c);
      }
    }
  }
  return out;
}

ComplexMatrix assemble_dense(const LocalHamiltonian& h, std::size_t dimension_cap) {
  const std::size_t dim = checked_pow(h.local_dim(), h.n_sites(), dimension_cap);
  ComplexMatrix out(dim, dim);
  for (std::size_t col = 0; col < dim; ++col) {
    for (const auto& [row, v] : h.column(col)) out(row, col) = v;
  }
  return out;
}

HamiltonianSplit split_subsystem(const LocalHamiltonian& h, const SubsystemSpec& a,
                                 std::size_t dimension_cap) {
  const std::size_t n = h.n_sites();
  a.validate(n);
  checked_pow(h.local_dim(), a.length, dimension_cap);
  checked_pow(h.local_dim(), n - a.length, dimension_cap);

  HamiltonianSplit split;
  split.subsystem = a;
  for (std::size_t i = 0; i < h.bond_count(); ++i) {
    const bool left_in = a.contains(i, n);
    const bool right_in = a.contains(h.right_site(i), n);
    if (left_in && right_in) {
      split.interior_terms.push_back(i);
    } else if (!left_in && !right_in) {
      split.complement_terms.push_back(i);
    } else {
      split.boundary_terms.push_back(i);
    }
  }
  const SubsystemSpec complement{(a.start + a.length) % n, n - a.length};
  split.h_a = block_operator(h, split.interior_terms, a.length,
                             [&](std::size_t site) { return a.position(site, n); });
  split.h_abar = block_operator(h, split.complement_terms, complement.length,
                                [&](std::size_t site) { return complement.position(site, n); });
  return split;
}

ComplexMatrix subsystem_hamiltonian(const LocalHamiltonian& h, const SubsystemSpec& a) {
  const std::size_t n = h.n_sites();
  a.validate(n);
  std::vector<std::size_t> interior;
  for (std::size_t i = 0; i < h.bond_count(); ++i) {
    if (a.contains(i, n) && a.contains(h.right_site(i), n)) interior.push_back(i);
  }
  return block_operator(h, interior, a.length,
                        [&](std::size_t site) { return a.position(site, n); });
}

ComplexMatrix reassemble(const LocalHamiltonian& h, const HamiltonianSplit& split,
                         std::size_t dimension_cap) {
  const std::size_t n = h.n_sites();
  const std::size_t d = h.local_dim();
  const std::size_t dim = checked_pow(d, n, dimension_cap);
  const std::size_t d_a = split.h_a.rows();
  const std::size_t d_abar = split.h_abar.rows();
  // Block order is the chain rotated so that the subsystem start leads.
  const ComplexMatrix rotated = kron(split.h_a, ComplexMatrix::identity(d_abar), dimension_cap) +
                                kron(ComplexMatrix::identity(d_a), split.h_abar, dimension_cap);
  const std::size_t tail = ipow(d, n - split.subsystem.start);
  ComplexMatrix out(dim, dim);
  for (std::size_t r = 0; r < dim; ++r) {
    const std::size_t rr = rotate_index(r, tail, dim);
    for (std::size_t c = 0; c < dim; ++c) out(r, c) = rotated(rr, rotate_index(c, tail, dim));
  }
  for (std::size_t i : split.boundary_terms) {
    out += embed_two_site(h.term(i), i, h.right_site(i), n, d);
  }
  return out;
}

VarianceReport variance_report(const LocalHamiltonian& h, const SubsystemSpec& a,
                               std::size_t dimension_cap) {
  const std::size_t n = h.n_sites();
  const std::size_t d = h.local_dim();
  const std::size_t dim = checked_pow(d, n, dimension_cap);
  const HamiltonianSplit split = split_subsystem(h, a, dimension_cap);

  VarianceReport rep;
  const double dd = static_cast<double>(d * d);
  rep.s2_per_term.reserve(h.bond_count());
  for (const auto& t : h.terms()) rep.s2_per_term.push_back(t.frobenius_norm_squared() / dd);

  double direct = 0.0;
  for (std::size_t col = 0; col < dim; ++col) {
    for (const auto& entry : h.column(col)) direct += std::norm(entry.second);
  }
  rep.s2 = direct / static_cast<double>(dim);
  rep.s2_a = split.h_a.frobenius_norm_squared() / static_cast<double>(split.h_a.rows());
  rep.s2_abar = split.h_abar.frobenius_norm_squared() / static_cast<double>(split.h_abar.rows());

  auto sum_over = [&](const std::vector<std::size_t>& idx) {
    double s = 0.0;
    for (std::size_t i : idx) s += rep.s2_per_term[i];
    return s;
  };
  double per_term_total = 0.0;
  for (double v : rep.s2_per_term) per_term_total += v;
  const struct {
    const char* name;
    double direct, summed;
  } checks[] = {{"s2", rep.s2, per_term_total},
                {"s2_a", rep.s2_a, sum_over(split.interior_terms)},
                {"s2_abar", rep.s2_abar, sum_over(split.complement_terms)}};
  for (const auto& c : checks) {
    if (std::abs(c.direct - c.summed) > 1e-9 * std::max(1.0, std::abs(c.direct))) {
      std::ostringstream msg;
      msg << "variance_report: " << c.name << " direct trace " << c.direct
          << " disagrees with per-term sum " << c.summed
          << " (terms are not Hilbert-Schmidt orthogonal)";
      throw InvariantError(msg.str());
    }
  }
  return rep;
}

std::vector<double> moment_report(const ComplexMatrix& h_a, std::size_t r_max) {
  if (r_max < 1) throw std::invalid_argument("moment_report: r_max must be at least 1");
  const auto ev = hermitian_eigenvalues(h_a);
  std::vector<double> moments(r_max, 0.0);
  std::vector<double> powers(ev.size(), 1.0);
  for (std::size_t r = 0; r < r_max; ++r) {
    for (std::size_t k = 0; k < ev.size(); ++k) powers[k] *= ev[k];
    moments[r] = pairwise_sum(powers) / static_cast<double>(ev.size());
  }
  return moments;
}

double energy_expectation(const LocalHamiltonian& h, const ComplexMatrix& rho) {
  const std::size_t dim = ipow(h.local_dim(), h.n_sites());
  if (rho.rows() != dim || rho.cols() != dim) {
    throw std::invalid_argument("energy_expectation: density matrix dimension mismatch");
  }
  Complex acc = 0.0;
  for (std::size_t col = 0; col < dim; ++col) {
    for (const auto& [row, v] : h.column(col)) acc += rho(col, row) * v;
  }
  return acc.real();
}

ConditionReport condition_check(const LocalHamiltonian& h, const SubsystemSpec& a) {
  const std::size_t n = h.n_sites();
  a.validate(n);
  std::vector<double> all(h.bond_count());
  std::vector<double> inside;
  for (std::size_t i = 0; i < h.bond_count(); ++i) {
    all[i] = h.term(i).frobenius_norm_squared();
    if (a.contains(i, n) && a.contains(h.right_site(i), n)) inside.push_back(all[i]);
  }
  const double total = pairwise_sum(all);
  if (!(total > 0.0)) throw std::invalid_argument("condition_check: Hamiltonian is zero");
  ConditionReport r;
  r.ratio = pairwise_sum(inside) / total;
  r.expected = static_cast<double>(a.length - 1) / static_cast<double>(n);
  r.defect = std::abs(r.ratio - r.expected);
  return r;
}

}  // namespace midspec
