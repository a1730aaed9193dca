#ifndef POLYSRL_EMBEDDINGS_H
#define POLYSRL_EMBEDDINGS_H

#include <Eigen/Dense>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace polysrl {

class EmbeddingError : public std::runtime_error {
 public:
  explicit EmbeddingError(const std::string& what) : std::runtime_error(what) {}
};

// Token -> vector table. Lookups lowercase the token; misses return the
// mean vector of all entries.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  EmbeddingTable(int dim, std::vector<std::pair<std::string, Eigen::VectorXd>> entries);

  int dim() const { return dim_; }
  size_t size() const { return entries_.size(); }
  const Eigen::VectorXd& oov_vector() const { return oov_vector_; }

  bool contains(const std::string& token) const;
  // Lowercased lookup; OOV tokens map to oov_vector.
  const Eigen::VectorXd& lookup(const std::string& token) const;

  const std::vector<std::pair<std::string, Eigen::VectorXd>>& entries() const {
    return entries_;
  }

 private:
  void recompute_oov();

  int dim_ = 0;
  std::vector<std::pair<std::string, Eigen::VectorXd>> entries_;
  std::unordered_map<std::string, size_t> index_;
  Eigen::VectorXd oov_vector_;
};

struct BilingualDictionary {
  std::vector<std::pair<std::string, std::string>> pairs;  // (foreign, english)
};

struct CcaProjection {
  Eigen::MatrixXd proj_foreign;   // d_f x k
  Eigen::MatrixXd proj_english;   // d_e x k
  Eigen::VectorXd correlations;   // k, non-increasing
  Eigen::VectorXd mean_foreign;
  Eigen::VectorXd mean_english;
};

EmbeddingTable load_vectors(std::istream& in);
EmbeddingTable load_vectors_file(const std::string& path);
void save_vectors(const EmbeddingTable& table, std::ostream& out);

// Dictionary files: two tab-separated tokens per line, '#' comments ignored.
BilingualDictionary load_dictionary(std::istream& in);
BilingualDictionary load_dictionary_file(const std::string& path);

EmbeddingTable pca_reduce(const EmbeddingTable& table, int k);

// Whitening (ridge lambda) + SVD of the cross-covariance. Rows of x and y
// are dictionary-paired vectors.
CcaProjection fit_cca(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, int k,
                      double lambda = 1e-3);

// Maps the foreign table into the English space through the CCA projections;
// the English table stays fixed (pivot convention).
EmbeddingTable align_to_pivot(const EmbeddingTable& foreign,
                              const EmbeddingTable& english,
                              const BilingualDictionary& dict, int k,
                              double lambda = 1e-3,
                              CcaProjection* fitted = nullptr);

std::string lowercase(const std::string& s);

}  // namespace polysrl

#endif  // POLYSRL_EMBEDDINGS_H
