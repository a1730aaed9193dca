#include "polysrl/embeddings.h"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iostream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

namespace polysrl {

std::string lowercase(const std::string& s) {
  std::string out = s;
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

EmbeddingTable::EmbeddingTable(
    int dim, std::vector<std::pair<std::string, Eigen::VectorXd>> entries)
    : dim_(dim), entries_(std::move(entries)) {
  for (size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].second.size() != dim_) {
      throw EmbeddingError("entry '" + entries_[i].first + "' has dim " +
                           std::to_string(entries_[i].second.size()) +
                           ", expected " + std::to_string(dim_));
    }
    index_.emplace(entries_[i].first, i);
  }
  recompute_oov();
}

void EmbeddingTable::recompute_oov() {
  oov_vector_ = Eigen::VectorXd::Zero(dim_);
  if (entries_.empty()) return;
  for (const auto& [token, vec] : entries_) oov_vector_ += vec;
  oov_vector_ /= static_cast<double>(entries_.size());
}

bool EmbeddingTable::contains(const std::string& token) const {
  return index_.count(lowercase(token)) > 0;
}

const Eigen::VectorXd& EmbeddingTable::lookup(const std::string& token) const {
  auto it = index_.find(lowercase(token));
  if (it == index_.end()) return oov_vector_;
  return entries_[it->second].second;
}

EmbeddingTable load_vectors(std::istream& in) {
  std::vector<std::pair<std::string, Eigen::VectorXd>> entries;
  std::set<std::string> seen;
  std::string line;
  long line_no = 0;
  int dim = -1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string token;
    row >> token;
    std::vector<double> values;
    double v;
    while (row >> v) values.push_back(v);
    if (dim < 0) {
      if (values.empty()) {
        throw EmbeddingError("line " + std::to_string(line_no) + ": no vector values");
      }
      dim = static_cast<int>(values.size());
    } else if (static_cast<int>(values.size()) != dim) {
      throw EmbeddingError("line " + std::to_string(line_no) + ": expected " +
                           std::to_string(dim) + " values, got " +
                           std::to_string(values.size()));
    }
    std::string key = lowercase(token);
    if (!seen.insert(key).second) {
      std::cerr << "warning: duplicate token '" << token << "' at line " << line_no
                << ", keeping first\n";
      continue;
    }
    entries.emplace_back(key, Eigen::Map<Eigen::VectorXd>(values.data(), dim));
  }
  if (entries.empty()) throw EmbeddingError("empty vector stream");
  return EmbeddingTable(dim, std::move(entries));
}

EmbeddingTable load_vectors_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw EmbeddingError("cannot open " + path);
  return load_vectors(in);
}

void save_vectors(const EmbeddingTable& table, std::ostream& out) {
  out.precision(17);
  for (const auto& [token, vec] : table.entries()) {
    out << token;
    for (int i = 0; i < vec.size(); ++i) out << ' ' << vec(i);
    out << '\n';
  }
}

BilingualDictionary load_dictionary(std::istream& in) {
  BilingualDictionary dict;
  std::set<std::pair<std::string, std::string>> seen;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0 || tab + 1 == line.size()) {
      throw EmbeddingError("dictionary line " + std::to_string(line_no) +
                           ": expected two tab-separated tokens");
    }
    std::pair<std::string, std::string> pair(lowercase(line.substr(0, tab)),
                                             lowercase(line.substr(tab + 1)));
    if (seen.insert(pair).second) dict.pairs.push_back(std::move(pair));
  }
  return dict;
}

BilingualDictionary load_dictionary_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw EmbeddingError("cannot open " + path);
  return load_dictionary(in);
}

EmbeddingTable pca_reduce(const EmbeddingTable& table, int k) {
  int d = table.dim();
  long n = static_cast<long>(table.size());
  if (k > d) {
    throw EmbeddingError("pca: k=" + std::to_string(k) + " exceeds dim " + std::to_string(d));
  }
  if (n < k + 1) {
    throw EmbeddingError("pca: need at least k+1 entries, have " + std::to_string(n));
  }
  Eigen::MatrixXd m(n, d);
  for (long i = 0; i < n; ++i) m.row(i) = table.entries()[i].second.transpose();
  Eigen::RowVectorXd mean = m.colwise().mean();
  m.rowwise() -= mean;
  Eigen::BDCSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinV);
  Eigen::MatrixXd components = svd.matrixV().leftCols(k);
  // Fix component signs for determinism.
  for (int c = 0; c < k; ++c) {
    int argmax;
    components.col(c).cwiseAbs().maxCoeff(&argmax);
    if (components(argmax, c) < 0) components.col(c) *= -1.0;
  }
  Eigen::MatrixXd projected = m * components;
  std::vector<std::pair<std::string, Eigen::VectorXd>> entries;
  entries.reserve(n);
  for (long i = 0; i < n; ++i) {
    entries.emplace_back(table.entries()[i].first, projected.row(i).transpose());
  }
  return EmbeddingTable(k, std::move(entries));
}

namespace {

// Inverse square root of cov + lambda*I via symmetric eigendecomposition.
Eigen::MatrixXd inv_sqrt(const Eigen::MatrixXd& cov, double lambda) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(
      cov + lambda * Eigen::MatrixXd::Identity(cov.rows(), cov.cols()));
  Eigen::VectorXd vals = eig.eigenvalues().cwiseMax(1e-12);
  return eig.eigenvectors() * vals.cwiseSqrt().cwiseInverse().asDiagonal() *
         eig.eigenvectors().transpose();
}

}  // namespace

CcaProjection fit_cca(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, int k,
                      double lambda) {
  long n = x.rows();
  if (y.rows() != n) throw EmbeddingError("cca: row counts differ");
  if (n <= k) {
    throw EmbeddingError("cca: need more than k=" + std::to_string(k) +
                         " paired rows, have " + std::to_string(n));
  }
  CcaProjection cca;
  cca.mean_foreign = x.colwise().mean().transpose();
  cca.mean_english = y.colwise().mean().transpose();
  Eigen::MatrixXd xc = x.rowwise() - cca.mean_foreign.transpose();
  Eigen::MatrixXd yc = y.rowwise() - cca.mean_english.transpose();
  if (xc.norm() < 1e-12 || yc.norm() < 1e-12) {
    throw EmbeddingError("cca: zero-variance input");
  }
  double denom = static_cast<double>(n - 1);
  Eigen::MatrixXd cxx = xc.transpose() * xc / denom;
  Eigen::MatrixXd cyy = yc.transpose() * yc / denom;
  Eigen::MatrixXd cxy = xc.transpose() * yc / denom;
  Eigen::MatrixXd wx = inv_sqrt(cxx, lambda);
  Eigen::MatrixXd wy = inv_sqrt(cyy, lambda);
  Eigen::BDCSVD<Eigen::MatrixXd> svd(wx * cxy * wy,
                                     Eigen::ComputeThinU | Eigen::ComputeThinV);
  int k_avail = static_cast<int>(svd.singularValues().size());
  if (k > k_avail) {
    throw EmbeddingError("cca: k=" + std::to_string(k) + " exceeds available rank " +
                         std::to_string(k_avail));
  }
  cca.proj_foreign = wx * svd.matrixU().leftCols(k);
  cca.proj_english = wy * svd.matrixV().leftCols(k);
  cca.correlations = svd.singularValues().head(k);
  return cca;
}

EmbeddingTable align_to_pivot(const EmbeddingTable& foreign,
                              const EmbeddingTable& english,
                              const BilingualDictionary& dict, int k,
                              double lambda, CcaProjection* fitted) {
  std::vector<std::pair<std::string, std::string>> usable;
  for (const auto& [f, e] : dict.pairs) {
    if (foreign.contains(f) && english.contains(e)) usable.emplace_back(f, e);
  }
  if (static_cast<int>(usable.size()) < std::max(k + 1, 2)) {
    throw EmbeddingError("alignment: only " + std::to_string(usable.size()) +
                         " usable in-vocabulary dictionary pairs, need > " +
                         std::to_string(k));
  }
  long n = static_cast<long>(usable.size());
  Eigen::MatrixXd x(n, foreign.dim());
  Eigen::MatrixXd y(n, english.dim());
  for (long i = 0; i < n; ++i) {
    x.row(i) = foreign.lookup(usable[i].first).transpose();
    y.row(i) = english.lookup(usable[i].second).transpose();
  }
  CcaProjection cca = fit_cca(x, y, k, lambda);
  if (fitted) *fitted = cca;
  // x -> pinv(proj_e^T) proj_f^T (x - mean_f) + mean_e
  Eigen::MatrixXd pinv = cca.proj_english.transpose()
                             .completeOrthogonalDecomposition()
                             .pseudoInverse();  // d_e x k
  std::vector<std::pair<std::string, Eigen::VectorXd>> entries;
  entries.reserve(foreign.size());
  for (const auto& [token, vec] : foreign.entries()) {
    Eigen::VectorXd p = cca.proj_foreign.transpose() * (vec - cca.mean_foreign);
    entries.emplace_back(token, (pinv * p + cca.mean_english).eval());
  }
  return EmbeddingTable(english.dim(), std::move(entries));
}

}  // namespace polysrl
