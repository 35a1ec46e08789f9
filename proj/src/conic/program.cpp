#include "program.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <numbers>
#include <ostream>

#include "../error.hpp"

namespace covsteer::conic {

int ConicProgram::cone_dim() const {
  int m = 0;
  for (const auto& k : cones) m += k.dim();
  return m;
}

int ConicProgram::degree() const {
  int d = 0;
  for (const auto& k : cones) d += k.degree();
  return d;
}

void ConicProgram::check() const {
  const int n = num_vars();
  const int m = cone_dim();
  auto fail = [](const std::string& what) {
    throw Error(ErrorCode::kDimensionMismatch, "conic program: " + what);
  };
  if (A.rows() != b.size() || (A.rows() > 0 && A.cols() != n)) fail("A/b/c sizes disagree");
  if (G.rows() != m || h.size() != m || G.cols() != n) fail("G/h do not match the cone layout");
  for (const auto& k : cones) {
    if (k.size <= 0) fail("empty cone");
  }
}

int svec_index(int i, int j, int p) {
  // Column j holds rows j..p-1; earlier columns hold p, p-1, ..., p-j+1 entries.
  return j * p - j * (j - 1) / 2 + (i - j);
}

Vector svec(const Matrix& m) {
  const int p = static_cast<int>(m.rows());
  Vector v(p * (p + 1) / 2);
  int idx = 0;
  for (int j = 0; j < p; ++j) {
    v(idx++) = m(j, j);
    for (int i = j + 1; i < p; ++i) v(idx++) = std::numbers::sqrt2 * m(i, j);
  }
  return v;
}

Matrix smat(const Eigen::Ref<const Vector>& v, int p) {
  Matrix m(p, p);
  int idx = 0;
  for (int j = 0; j < p; ++j) {
    m(j, j) = v(idx++);
    for (int i = j + 1; i < p; ++i) {
      m(i, j) = v(idx++) / std::numbers::sqrt2;
      m(j, i) = m(i, j);
    }
  }
  return m;
}

namespace {

void write_vector(std::ostream& out, const char* tag, const Vector& v) {
  out << tag;
  for (Eigen::Index i = 0; i < v.size(); ++i) out << ' ' << v(i);
  out << '\n';
}

void write_sparse(std::ostream& out, const char* tag, const SparseMatrix& m) {
  out << tag << ' ' << m.nonZeros() << '\n';
  for (int col = 0; col < m.outerSize(); ++col) {
    for (SparseMatrix::InnerIterator it(m, col); it; ++it) {
      out << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
    }
  }
}

void expect(std::istream& in, const std::string& token) {
  std::string got;
  if (!(in >> got) || got != token) {
    throw Error(ErrorCode::kParseError, "conic dump: expected '" + token + "', got '" + got + "'");
  }
}

Vector read_vector(std::istream& in, const std::string& tag, int size) {
  expect(in, tag);
  Vector v(size);
  for (int i = 0; i < size; ++i) {
    if (!(in >> v(i))) throw Error(ErrorCode::kParseError, "conic dump: short vector " + tag);
  }
  return v;
}

SparseMatrix read_sparse(std::istream& in, const std::string& tag, int rows, int cols) {
  expect(in, tag);
  long nnz = 0;
  in >> nnz;
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(nnz));
  for (long k = 0; k < nnz; ++k) {
    int r = 0;
    int c = 0;
    double v = 0.0;
    if (!(in >> r >> c >> v) || r < 0 || r >= rows || c < 0 || c >= cols) {
      throw Error(ErrorCode::kParseError, "conic dump: bad triplet in " + tag);
    }
    triplets.emplace_back(r, c, v);
  }
  SparseMatrix m(rows, cols);
  m.setFromTriplets(triplets.begin(), triplets.end());
  return m;
}

}  // namespace

void write_program(const ConicProgram& program, std::ostream& out) {
  program.check();
  const auto flags = out.flags();
  const auto precision = out.precision();
  out << std::setprecision(17);
  out << "covsteer-conic 1\n";
  out << "vars " << program.num_vars() << " eq " << program.num_eq() << " rows "
      << program.cone_dim() << '\n';
  out << "cones " << program.cones.size() << '\n';
  for (const auto& k : program.cones) {
    const char tag = k.kind == ConeKind::kNonnegative ? 'l'
                     : k.kind == ConeKind::kSecondOrder ? 'q'
                                                        : 's';
    out << tag << ' ' << k.size << '\n';
  }
  write_vector(out, "c", program.c);
  write_vector(out, "b", program.b);
  write_vector(out, "h", program.h);
  write_sparse(out, "A", program.A);
  write_sparse(out, "G", program.G);
  out.flags(flags);
  out.precision(precision);
}

void write_program(const ConicProgram& program, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIoError, "cannot open " + path + " for writing");
  write_program(program, out);
  if (!out) throw Error(ErrorCode::kIoError, "failed writing " + path);
}

ConicProgram read_program(std::istream& in) {
  expect(in, "covsteer-conic");
  int version = 0;
  in >> version;
  if (version != 1) throw Error(ErrorCode::kParseError, "conic dump: unsupported version");
  int n = 0;
  int p = 0;
  int m = 0;
  expect(in, "vars");
  in >> n;
  expect(in, "eq");
  in >> p;
  expect(in, "rows");
  in >> m;
  expect(in, "cones");
  std::size_t count = 0;
  in >> count;
  ConicProgram program;
  for (std::size_t i = 0; i < count; ++i) {
    std::string tag;
    Cone k;
    in >> tag >> k.size;
    if (tag == "l") {
      k.kind = ConeKind::kNonnegative;
    } else if (tag == "q") {
      k.kind = ConeKind::kSecondOrder;
    } else if (tag == "s") {
      k.kind = ConeKind::kPsd;
    } else {
      throw Error(ErrorCode::kParseError, "conic dump: unknown cone tag '" + tag + "'");
    }
    program.cones.push_back(k);
  }
  program.c = read_vector(in, "c", n);
  program.b = read_vector(in, "b", p);
  program.h = read_vector(in, "h", m);
  program.A = read_sparse(in, "A", p, n);
  program.G = read_sparse(in, "G", m, n);
  program.check();
  return program;
}

}  // namespace covsteer::conic
