#pragma once

#include "splm/box.hpp"
#include "splm/problem.hpp"
#include "splm/rng.hpp"
#include "splm/types.hpp"

#include <Eigen/Eigenvalues>

#include <charconv>
#include <cstdint>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

namespace splm {

/// Nonconvex QP with convex quadratic constraints over a box:
///   minimize    (1/2) x^T Q x + r^T x
///   subject to  (1/2) x^T A_i x + b_i^T x + c_i <= 0,  i = 1..m
///               lower <= x <= upper
/// Q is symmetric indefinite with prescribed smallest eigenvalue; each A_i is
/// positive semidefinite and every c_i < 0, so x = 0 is a strict Slater point.
struct QpInstance {
  Mat Q;
  Vec r;
  std::vector<Mat> A;
  std::vector<Vec> b;
  Vec c;
  BoxSet box;
  std::uint64_t seed = 0;
  double target_min_eig = 0.0;

  int n() const { return static_cast<int>(r.size()); }
  int m() const { return static_cast<int>(c.size()); }

  double objective(const Vec& x) const { return 0.5 * x.dot(Q * x) + r.dot(x); }
  Vec objective_grad(const Vec& x) const { return Q * x + r; }
  double constraint(int i, const Vec& x) const {
    return 0.5 * x.dot(A[static_cast<size_t>(i)] * x) + b[static_cast<size_t>(i)].dot(x) +
           c[i];
  }
  Vec constraint_values(const Vec& x) const {
    Vec h(m());
    for (int i = 0; i < m(); ++i) h[i] = constraint(i, x);
    return h;
  }
  Mat constraint_jacobian(const Vec& x) const {
    Mat jac(m(), n());
    for (int i = 0; i < m(); ++i)
      jac.row(i) = (A[static_cast<size_t>(i)] * x + b[static_cast<size_t>(i)]).transpose();
    return jac;
  }

  void validate() const {
    const int nn = n();
    if (nn < 1) throw ContractViolation("qp instance: n must be >= 1");
    if (Q.rows() != nn || Q.cols() != nn) throw ContractViolation("qp instance: Q shape");
    if (!Q.allFinite() || !r.allFinite() || !c.allFinite())
      throw ContractViolation("qp instance: data must be finite");
    const double q_norm = Q.norm();
    if ((Q - Q.transpose()).norm() > 1e-12 * std::max(1.0, q_norm))
      throw ContractViolation("qp instance: Q is not symmetric");
    if (static_cast<int>(A.size()) != m() || static_cast<int>(b.size()) != m())
      throw ContractViolation("qp instance: constraint list shapes disagree");
    for (int i = 0; i < m(); ++i) {
      if (A[static_cast<size_t>(i)].rows() != nn || A[static_cast<size_t>(i)].cols() != nn ||
          b[static_cast<size_t>(i)].size() != nn)
        throw ContractViolation("qp instance: constraint block shape");
      if (!A[static_cast<size_t>(i)].allFinite() || !b[static_cast<size_t>(i)].allFinite())
        throw ContractViolation("qp instance: data must be finite");
      if (!(c[i] < 0.0))
        throw ContractViolation("qp instance: c_i must be negative (Slater point at 0)");
    }
    box.validate();
    if (box.dim() != nn) throw ContractViolation("qp instance: box dimension");
  }
};

/// Draws one instance from the seeded Gaussian family. Draw order is fixed:
/// Q's raw matrix row-major, then r, then per constraint the raw matrix
/// row-major followed by b_i. Q is symmetrized and then shifted by a multiple
/// of the identity so its smallest eigenvalue equals min_eig exactly (up to
/// the eigensolver); A_i = G_i^T G_i / sqrt(n) is PSD by construction; every
/// c_i = -1 and the box is [-10, 10]^n.
inline QpInstance generate_qp(int n, int m, double min_eig, std::uint64_t seed) {
  if (n < 1) throw ContractViolation("generate_qp: n must be >= 1");
  if (m < 0) throw ContractViolation("generate_qp: m must be >= 0");
  if (!(min_eig < 0.0)) throw ContractViolation("generate_qp: min_eig must be negative");

  Rng rng(seed);
  QpInstance inst;
  inst.seed = seed;
  inst.target_min_eig = min_eig;

  Mat raw(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) raw(i, j) = rng.gaussian();
  Mat q0 = 0.5 * (raw + raw.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> es(q0, Eigen::EigenvaluesOnly);
  const double lambda_min0 = es.eigenvalues().minCoeff();
  inst.Q = q0 - (lambda_min0 - min_eig) * Mat::Identity(n, n);

  inst.r.resize(n);
  for (int j = 0; j < n; ++j) inst.r[j] = rng.gaussian();

  inst.A.reserve(static_cast<size_t>(m));
  inst.b.reserve(static_cast<size_t>(m));
  inst.c = Vec::Constant(std::max(m, 0), -1.0);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (int i = 0; i < m; ++i) {
    Mat g(n, n);
    for (int a = 0; a < n; ++a)
      for (int bcol = 0; bcol < n; ++bcol) g(a, bcol) = rng.gaussian();
    inst.A.push_back(scale * (g.transpose() * g));
    Vec bi(n);
    for (int j = 0; j < n; ++j) bi[j] = rng.gaussian();
    inst.b.push_back(std::move(bi));
  }

  inst.box = BoxSet::cube(n, -10.0, 10.0);
  inst.validate();
  return inst;
}

/// Wraps instance data as oracles. The returned Problem shares ownership of
/// the instance, so it outlives the caller's copy.
inline Problem to_problem(std::shared_ptr<const QpInstance> inst) {
  inst->validate();
  Problem p;
  p.dim_n = inst->n();
  p.num_m = inst->m();
  p.box = inst->box;
  p.qp = inst;
  p.value = [inst](const Vec& x) { return inst->objective(x); };
  p.gradient = [inst](const Vec& x) { return inst->objective_grad(x); };
  p.constraints = [inst](const Vec& x) { return inst->constraint_values(x); };
  p.jacobian = [inst](const Vec& x) { return inst->constraint_jacobian(x); };
  p.validate_shape();
  return p;
}

inline Problem to_problem(const QpInstance& inst) {
  return to_problem(std::make_shared<const QpInstance>(inst));
}

namespace detail {

inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& tok, long line) {
  double v = 0.0;
  auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size())
    throw ParseError("bad numeric token '" + tok + "'", line);
  return v;
}

struct LineReader {
  std::istream& in;
  long line_no = 0;
  std::string next() {
    std::string s;
    if (!std::getline(in, s)) throw ParseError("unexpected end of file", line_no);
    ++line_no;
    if (!s.empty() && s.back() == '\r') s.pop_back();
    return s;
  }
  Vec row(int n) {
    std::istringstream ss(next());
    Vec v(n);
    std::string tok;
    for (int j = 0; j < n; ++j) {
      if (!(ss >> tok)) throw ParseError("row too short", line_no);
      v[j] = parse_double(tok, line_no);
    }
    if (ss >> tok) throw ParseError("row too long", line_no);
    return v;
  }
  void expect(const std::string& label) {
    std::string s = next();
    if (s != label) throw ParseError("expected '" + label + "', got '" + s + "'", line_no);
  }
  long parse_long(const std::string& key) {
    std::string s = next();
    if (s.rfind(key + "=", 0) != 0) throw ParseError("expected '" + key + "='", line_no);
    const std::string tok = s.substr(key.size() + 1);
    long v = 0;
    auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size())
      throw ParseError("bad integer token '" + tok + "'", line_no);
    return v;
  }
  double parse_keyed_double(const std::string& key) {
    std::string s = next();
    if (s.rfind(key + "=", 0) != 0) throw ParseError("expected '" + key + "='", line_no);
    return parse_double(s.substr(key.size() + 1), line_no);
  }
};

}  // namespace detail

/// Text format, shortest round-trip decimals, canonical extension ".qp":
///   splm-qp-v1
///   n= m= min_eig= seed=
///   Q (n rows), r (1 row), then per constraint A<i>, b<i>, c<i>,
///   box (lower row, upper row).
inline void save_qp(const QpInstance& inst, const std::string& path) {
  inst.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  const int n = inst.n(), m = inst.m();
  out << "splm-qp-v1\n";
  out << "n=" << n << "\n";
  out << "m=" << m << "\n";
  out << "min_eig=" << detail::format_double(inst.target_min_eig) << "\n";
  out << "seed=" << inst.seed << "\n";
  auto write_row = [&out](const Vec& v) {
    for (int j = 0; j < v.size(); ++j) {
      if (j) out << ' ';
      out << detail::format_double(v[j]);
    }
    out << '\n';
  };
  auto write_mat = [&](const Mat& a) {
    for (int i = 0; i < a.rows(); ++i) write_row(a.row(i).transpose());
  };
  out << "Q\n";
  write_mat(inst.Q);
  out << "r\n";
  write_row(inst.r);
  for (int i = 0; i < m; ++i) {
    out << "A" << (i + 1) << "\n";
    write_mat(inst.A[static_cast<size_t>(i)]);
    out << "b" << (i + 1) << "\n";
    write_row(inst.b[static_cast<size_t>(i)]);
    out << "c" << (i + 1) << "\n";
    out << detail::format_double(inst.c[i]) << "\n";
  }
  out << "box\n";
  write_row(inst.box.lower);
  write_row(inst.box.upper);
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

inline QpInstance load_qp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "' for reading");
  detail::LineReader rd{in};
  rd.expect("splm-qp-v1");
  QpInstance inst;
  const long n = rd.parse_long("n");
  const long m = rd.parse_long("m");
  if (n < 1 || n > 1000000 || m < 0 || m > 1000000)
    throw ParseError("implausible dimensions", rd.line_no);
  inst.target_min_eig = rd.parse_keyed_double("min_eig");
  inst.seed = static_cast<std::uint64_t>(rd.parse_long("seed"));
  auto read_mat = [&rd](int rows, int cols) {
    Mat a(rows, cols);
    for (int i = 0; i < rows; ++i) a.row(i) = rd.row(cols).transpose();
    return a;
  };
  const int ni = static_cast<int>(n), mi = static_cast<int>(m);
  rd.expect("Q");
  inst.Q = read_mat(ni, ni);
  rd.expect("r");
  inst.r = rd.row(ni);
  inst.c.resize(mi);
  for (int i = 0; i < mi; ++i) {
    rd.expect("A" + std::to_string(i + 1));
    inst.A.push_back(read_mat(ni, ni));
    rd.expect("b" + std::to_string(i + 1));
    inst.b.push_back(rd.row(ni));
    rd.expect("c" + std::to_string(i + 1));
    inst.c[i] = rd.row(1)[0];
  }
  rd.expect("box");
  Vec lo = rd.row(ni);
  Vec up = rd.row(ni);
  inst.box = BoxSet(std::move(lo), std::move(up));
  inst.validate();  // rejects e.g. c_i >= 0
  return inst;
}

}  // namespace splm
