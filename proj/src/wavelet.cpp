#include "wsim/wavelet.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <string>

namespace wsim {

const std::array<double, kFilterLength>& db9_lowpass() {
  static const std::array<double, kFilterLength> h = {
      3.93473203162716025764e-05,  -2.51963188942710123765e-04,
      2.30385763523195972796e-04,  1.84764688305622654628e-03,
      -4.28150368246343025758e-03, -4.72320475775139716340e-03,
      2.23616621236790956428e-02,  2.50947114831451972578e-04,
      -6.76328290613299742962e-02, 3.07256814793333797586e-02,
      1.48540749338106375932e-01,  -9.68407832229764564680e-02,
      -2.93273783279174915517e-01, 1.33197385825007563742e-01,
      6.57288078051300517224e-01,  6.04823123690111152939e-01,
      2.43834674612590340814e-01,  3.80779473638783449996e-02,
  };
  return h;
}

namespace {

// phi at the integers 0..17: the eigenvector of the two-scale operator for
// eigenvalue 1, normalised by the partition of unity sum_k phi(k) = 1.
Vector integer_values() {
  const auto& h = db9_lowpass();
  const double r2 = std::sqrt(2.0);
  constexpr int n = kSupportLength + 1;
  Matrix system = Matrix::Zero(n + 1, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const int l = 2 * i - j;
      if (l >= 0 && l < kFilterLength) system(i, j) = r2 * h[static_cast<std::size_t>(l)];
    }
    system(i, i) -= 1.0;
  }
  system.row(n).setOnes();
  Vector rhs = Vector::Zero(n + 1);
  rhs(n) = 1.0;
  Vector v = system.colPivHouseholderQr().solve(rhs);
  v(0) = 0.0;
  v(n - 1) = 0.0;
  return v;
}

Vector centered_difference(const Vector& v, double spacing) {
  const Index n = v.size();
  Vector d(n);
  for (Index i = 0; i < n; ++i) {
    const double left = i > 0 ? v(i - 1) : 0.0;
    const double right = i + 1 < n ? v(i + 1) : 0.0;
    d(i) = (right - left) / (2.0 * spacing);
  }
  return d;
}

}  // namespace

WaveletTable build_table(int depth) {
  if (depth < 8 || depth > 16) {
    throw ConfigError("wavelet table depth must lie in [8, 16], got " + std::to_string(depth));
  }
  const auto& h = db9_lowpass();
  const double r2 = std::sqrt(2.0);

  Vector phi = integer_values();
  for (int d = 1; d <= depth; ++d) {
    const Index half = Index{1} << (d - 1);
    const Index count = kSupportLength * (Index{1} << d) + 1;
    Vector next = Vector::Zero(count);
    for (Index i = 0; i < count; ++i) {
      double acc = 0.0;
      for (int l = 0; l < kFilterLength; ++l) {
        const Index src = i - l * half;
        if (src >= 0 && src < phi.size()) acc += h[static_cast<std::size_t>(l)] * phi(src);
      }
      next(i) = r2 * acc;
    }
    phi = std::move(next);
  }

  // psi(x) = sqrt(2) sum_k g_k phi(2x - k), g_k = (-1)^k h_{17-k}
  const Index full = Index{1} << depth;
  const Index count = phi.size();
  Vector psi = Vector::Zero(count);
  for (Index i = 0; i < count; ++i) {
    double acc = 0.0;
    for (int k = 0; k < kFilterLength; ++k) {
      const Index src = 2 * i - k * full;
      if (src < 0 || src >= count) continue;
      const double g = ((k % 2 == 0) ? 1.0 : -1.0) * h[static_cast<std::size_t>(kSupportLength - k)];
      acc += g * phi(src);
    }
    psi(i) = r2 * acc;
  }
  phi(0) = phi(count - 1) = 0.0;
  psi(0) = psi(count - 1) = 0.0;

  WaveletTable table;
  table.depth = depth;
  table.spacing = std::ldexp(1.0, -depth);
  table.phi_deriv = centered_difference(phi, table.spacing);
  table.psi_deriv = centered_difference(psi, table.spacing);
  table.phi = std::move(phi);
  table.psi = std::move(psi);
  return table;
}

std::shared_ptr<const WaveletTable> shared_table(int depth) {
  static std::mutex mutex;
  static std::map<int, std::shared_ptr<const WaveletTable>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto& slot = cache[depth];
  if (!slot) slot = std::make_shared<const WaveletTable>(build_table(depth));
  return slot;
}

Jet eval_mother(const Vector& values, const Vector& derivs, double spacing, double x) {
  if (!(x > 0.0 && x < static_cast<double>(kSupportLength))) return {};
  const double s = x / spacing;
  Index i = static_cast<Index>(s);
  i = std::min(i, values.size() - 2);
  const double t = s - static_cast<double>(i);
  const double t2 = t * t;
  const double t3 = t2 * t;
  const double p0 = values(i);
  const double p1 = values(i + 1);
  const double m0 = derivs(i) * spacing;
  const double m1 = derivs(i + 1) * spacing;

  Jet jet;
  jet.value = (2 * t3 - 3 * t2 + 1) * p0 + (t3 - 2 * t2 + t) * m0 + (-2 * t3 + 3 * t2) * p1 +
              (t3 - t2) * m1;
  jet.deriv = ((6 * t2 - 6 * t) * p0 + (3 * t2 - 4 * t + 1) * m0 + (-6 * t2 + 6 * t) * p1 +
               (3 * t2 - 2 * t) * m1) /
              spacing;
  jet.second = ((12 * t - 6) * p0 + (6 * t - 4) * m0 + (-12 * t + 6) * p1 + (6 * t - 2) * m1) /
               (spacing * spacing);
  return jet;
}

Interval support(const BasisIndex& idx, double unit) {
  if (idx.kind == BasisKind::scaling) {
    return {-(idx.shift + 1) * unit, (16 - idx.shift) * unit};
  }
  const double scale = std::ldexp(unit, -idx.level);
  return {-(idx.shift + 1) * scale, (16 - idx.shift) * scale};
}

std::pair<int, int> wavelet_shift_range(int level, int resolution) {
  const int span = resolution << level;
  return {-span, 15 + span};
}

std::vector<BasisIndex> enumerate_levels(double s_X, int max_level, int resolution) {
  if (!(s_X > 0.0)) throw ConfigError("s_X must be positive");
  if (resolution < 1) throw ConfigError("resolution must be at least 1");
  std::vector<BasisIndex> out;
  Index k = 0;
  for (int n = resolution - 1; n < resolution - 1 + kScalingCount; ++n) {
    out.push_back({k++, BasisKind::scaling, 0, n});
  }
  for (int j = 0; j <= max_level; ++j) {
    const auto [lo, hi] = wavelet_shift_range(j, resolution);
    for (int q = lo; q <= hi; ++q) out.push_back({k++, BasisKind::wavelet, j, q});
  }
  return out;
}

Basis::Basis(double s_X, Index m, BasisOptions options)
    : Basis(s_X, m, shared_table(options.depth), options.resolution) {}

Basis::Basis(double s_X, Index m, std::shared_ptr<const WaveletTable> table, int resolution)
    : s_X_(s_X), resolution_(resolution), table_(std::move(table)) {
  if (!(s_X > 0.0)) throw ConfigError("s_X must be positive");
  if (resolution < 1) throw ConfigError("resolution must be at least 1");
  if (m < 1) throw ConfigError("basis size m must be at least 1");
  if (!table_) throw ConfigError("basis requires a wavelet table");
  constexpr int kMaxLevel = 24;
  int level = -1;
  std::vector<BasisIndex> all = enumerate_levels(s_X, level, resolution);
  while (static_cast<Index>(all.size()) < m) {
    if (++level > kMaxLevel) throw ConfigError("basis size m is too large");
    all = enumerate_levels(s_X, level, resolution);
  }
  all.resize(static_cast<std::size_t>(m));
  index_map_ = std::move(all);
}

int Basis::max_level() const {
  int level = -1;
  for (const auto& idx : index_map_) {
    if (idx.kind == BasisKind::wavelet) level = std::max(level, idx.level);
  }
  return level;
}

Index Basis::flat_index(BasisKind kind, int level, int shift) const {
  for (const auto& idx : index_map_) {
    if (idx.kind == kind && idx.shift == shift && (kind == BasisKind::scaling || idx.level == level)) {
      return idx.k;
    }
  }
  return -1;
}

Jet Basis::jet(Index k, double x) const {
  const BasisIndex& idx = index(k);
  const double u = unit();
  const WaveletTable& tab = *table_;
  double amplitude;
  double chain;
  double y;
  Jet mother;
  if (idx.kind == BasisKind::scaling) {
    amplitude = 1.0 / std::sqrt(u);
    chain = 1.0 / u;
    y = x * chain + 1.0 + idx.shift;
    mother = eval_mother(tab.phi, tab.phi_deriv, tab.spacing, y);
  } else {
    const double dyad = std::ldexp(1.0, idx.level);
    amplitude = std::sqrt(dyad / u);
    chain = dyad / u;
    y = x * chain + 1.0 + idx.shift;
    mother = eval_mother(tab.psi, tab.psi_deriv, tab.spacing, y);
  }
  return {amplitude * mother.value, amplitude * chain * mother.deriv,
          amplitude * chain * chain * mother.second};
}

Vector Basis::basis_vector(double x) const {
  Vector e(size());
  for (Index k = 0; k < size(); ++k) e(k) = jet(k, x).value;
  return e;
}

Vector Basis::basis_deriv_vector(double x) const {
  Vector e(size());
  for (Index k = 0; k < size(); ++k) e(k) = jet(k, x).deriv;
  return e;
}

void Basis::eval_all(double x, Eigen::Ref<Vector> value, Eigen::Ref<Vector> deriv,
                     Eigen::Ref<Vector> second) const {
  for (Index k = 0; k < size(); ++k) {
    const Jet j = jet(k, x);
    value(k) = j.value;
    deriv(k) = j.deriv;
    second(k) = j.second;
  }
}

void Basis::eval_all(double x, Eigen::Ref<Vector> value, Eigen::Ref<Vector> deriv) const {
  for (Index k = 0; k < size(); ++k) {
    const Jet j = jet(k, x);
    value(k) = j.value;
    deriv(k) = j.deriv;
  }
}

std::vector<Index> Basis::admissible_sizes(int max_level) const {
  std::vector<Index> sizes{kScalingCount};
  for (int j = 0; j <= max_level; ++j) {
    const auto [lo, hi] = wavelet_shift_range(j, resolution_);
    sizes.push_back(sizes.back() + (hi - lo + 1));
  }
  return sizes;
}

double link_eval(const Basis& basis, const Vector& eta, double x) {
  double acc = 0.0;
  for (Index k = 0; k < basis.size(); ++k) acc += eta(k) * basis.jet(k, x).value;
  return acc;
}

double link_deriv(const Basis& basis, const Vector& eta, double x) {
  double acc = 0.0;
  for (Index k = 0; k < basis.size(); ++k) acc += eta(k) * basis.jet(k, x).deriv;
  return acc;
}

double link_second_deriv(const Basis& basis, const Vector& eta, double x) {
  double acc = 0.0;
  for (Index k = 0; k < basis.size(); ++k) acc += eta(k) * basis.jet(k, x).second;
  return acc;
}

namespace {

// Support of a member in integer units of u / 2^level.
std::pair<long long, long long> support_in_units(const BasisIndex& idx, int level) {
  const int own = idx.kind == BasisKind::scaling ? 0 : idx.level;
  const long long scale = 1LL << (level - own);
  return {-(idx.shift + 1LL) * scale, (16LL - idx.shift) * scale};
}

}  // namespace

int overlap_count(const Basis& basis, Index k, int level) {
  const BasisIndex& target = basis.index(k);
  const int own = target.kind == BasisKind::scaling ? 0 : target.level;
  if (level < own) throw ConfigError("overlap_count requires level >= level of member k");
  const auto [lo, hi] = support_in_units(target, level);
  int count = 0;
  for (const auto& idx : basis.index_map()) {
    if (idx.kind != BasisKind::wavelet || idx.level != level) continue;
    const long long start = -(idx.shift + 1LL);
    if (start >= lo && start < hi) ++count;
  }
  return count;
}

Matrix gram_matrix(const Basis& basis) {
  const Index m = basis.size();
  const int finest = std::max(0, basis.max_level());
  const double h = std::ldexp(basis.unit() * basis.table().spacing, -finest);
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (Index k = 0; k < m; ++k) {
    const Interval s = basis.support(k);
    lo = std::min(lo, s.lo);
    hi = std::max(hi, s.hi);
  }
  const Index points = static_cast<Index>(std::ceil((hi - lo) / h));
  constexpr Index kChunk = 2048;
  Matrix gram = Matrix::Zero(m, m);
  Matrix rows(kChunk, m);
  for (Index start = 0; start < points; start += kChunk) {
    const Index count = std::min(kChunk, points - start);
    for (Index i = 0; i < count; ++i) {
      rows.row(i) = basis.basis_vector(lo + (static_cast<double>(start + i) + 0.5) * h).transpose();
    }
    gram.noalias() += rows.topRows(count).transpose() * rows.topRows(count);
  }
  return gram * h;
}

}  // namespace wsim
