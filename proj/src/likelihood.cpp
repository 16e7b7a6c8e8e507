#include "wsim/likelihood.hpp"

#include "wsim/sphere.hpp"

namespace wsim {

namespace {

Matrix kept_rows(const Dataset& data) {
  Matrix Xk(data.kept_count(), data.p());
  for (Index i = 0; i < data.kept_count(); ++i) Xk.row(i) = data.X.row(data.kept[static_cast<std::size_t>(i)]);
  return Xk;
}

void check_param(const Dataset& data, const Basis& basis, const FullParam& param) {
  if (param.angles.size() != data.p() - 1) throw ConfigError("angle vector must have p - 1 entries");
  if (param.eta.size() != basis.size()) throw ConfigError("eta length differs from basis size");
}

}  // namespace

Matrix LikelihoodBlocks::full() const {
  const Index q = D2.rows();
  const Index m = H2.rows();
  Matrix out(q + m, q + m);
  out << D2, A, A.transpose(), H2;
  return out;
}

Vector index_values(const Dataset& data, const Vector& theta) {
  Vector t(data.kept_count());
  for (Index i = 0; i < t.size(); ++i) t(i) = data.X.row(data.kept[static_cast<std::size_t>(i)]).dot(theta);
  return t;
}

Matrix design_matrix(const Dataset& data, const Basis& basis, const Vector& theta) {
  const Vector t = index_values(data, theta);
  Matrix E(t.size(), basis.size());
  for (Index i = 0; i < t.size(); ++i) {
    for (Index k = 0; k < basis.size(); ++k) E(i, k) = basis.jet(k, t(i)).value;
  }
  return E;
}

Vector kept_response(const Dataset& data) {
  Vector y(data.kept_count());
  for (Index i = 0; i < y.size(); ++i) y(i) = data.Y(data.kept[static_cast<std::size_t>(i)]);
  return y;
}

double loglik(const Dataset& data, const Basis& basis, const FullParam& param) {
  check_param(data, basis, param);
  const Vector t = index_values(data, embed(param.angles));
  double acc = 0.0;
  for (Index i = 0; i < t.size(); ++i) {
    const double r = data.Y(data.kept[static_cast<std::size_t>(i)]) - link_eval(basis, param.eta, t(i));
    acc += r * r;
  }
  return -0.5 * acc;
}

Score score(const Dataset& data, const Basis& basis, const FullParam& param) {
  check_param(data, basis, param);
  const Index m = basis.size();
  const Matrix Xk = kept_rows(data);
  const Vector theta = embed(param.angles);
  const Matrix J = Xk * grad_embed(param.angles);  // row i is J_i^T
  Vector e(m), de(m);
  Vector weights(Xk.rows());
  Score s{Vector::Zero(param.angles.size()), Vector::Zero(m)};
  for (Index i = 0; i < Xk.rows(); ++i) {
    basis.eval_all(Xk.row(i).dot(theta), e, de);
    const double r = data.Y(data.kept[static_cast<std::size_t>(i)]) - e.dot(param.eta);
    weights(i) = r * de.dot(param.eta);
    s.eta += r * e;
  }
  s.theta = J.transpose() * weights;
  return s;
}

LikelihoodBlocks hessian_blocks(const Dataset& data, const Basis& basis, const FullParam& param,
                                bool gauss_newton_only) {
  check_param(data, basis, param);
  const Index m = basis.size();
  const Index n = data.kept_count();
  const Matrix Xk = kept_rows(data);
  const Vector theta = embed(param.angles);
  const Matrix J = Xk * grad_embed(param.angles);

  Matrix E(n, m), dE(n, m);
  Vector f1(n), f2(n), r(n);
  Vector e(m), de(m), d2e(m);
  for (Index i = 0; i < n; ++i) {
    basis.eval_all(Xk.row(i).dot(theta), e, de, d2e);
    E.row(i) = e.transpose();
    dE.row(i) = de.transpose();
    f1(i) = de.dot(param.eta);
    f2(i) = d2e.dot(param.eta);
    r(i) = data.Y(data.kept[static_cast<std::size_t>(i)]) - e.dot(param.eta);
  }

  LikelihoodBlocks blocks;
  blocks.gauss_newton_only = gauss_newton_only;
  const Matrix FJ = f1.asDiagonal() * J;  // rows f'_i J_i^T
  blocks.D2 = FJ.transpose() * FJ;
  blocks.A = FJ.transpose() * E;
  blocks.H2 = E.transpose() * E;
  blocks.score_theta = FJ.transpose() * r;
  blocks.score_eta = E.transpose() * r;

  if (!gauss_newton_only) {
    const Vector rf2 = r.cwiseProduct(f2);
    blocks.D2 -= J.transpose() * rf2.asDiagonal() * J;
    const Vector xw = Xk.transpose() * r.cwiseProduct(f1);
    blocks.D2 -= contract_hessian(hess_embed(param.angles), xw);
    blocks.A -= J.transpose() * r.asDiagonal() * dE;
  }
  blocks.D2 = 0.5 * (blocks.D2 + blocks.D2.transpose()).eval();
  return blocks;
}

}  // namespace wsim
