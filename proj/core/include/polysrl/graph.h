#ifndef POLYSRL_GRAPH_H
#define POLYSRL_GRAPH_H

#include <Eigen/Dense>
#include <functional>
#include <map>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace polysrl {

using Mat = Eigen::MatrixXd;

class GraphError : public std::runtime_error {
 public:
  explicit GraphError(const std::string& what) : std::runtime_error(what) {}
};

// Reverse-mode tape over dense double matrices. Nodes are appended in
// topological order; backward walks the tape in reverse.
class Graph {
 public:
  // Leaves.
  int constant(const Mat& value);
  int param(const std::string& name, const Mat& value);

  // Forward ops.
  int matmul(int a, int b);
  int add(int a, int b);          // same shape, or b a 1-row bias broadcast
  int mul(int a, int b);          // elementwise
  int concat_cols(int a, int b);
  int concat_rows(int a, int b);
  int sigmoid(int a);
  int tanh(int a);
  int softmax_rows(int a);
  // mask: same shape, nonzero = masked out (softmax weight forced to 0).
  int masked_softmax_rows(int a, const Mat& mask);
  // Sum over rows of -log(probs(r, gold[r])); rows with gold[r] < 0 skipped.
  int cross_entropy(int probs, const std::vector<int>& gold);
  int sum(int a);                 // 1x1
  int scale(int a, double c);
  int slice_rows(int a, int row0, int row1);
  int slice_cols(int a, int col0, int col1);
  // Inverted dropout; identity when rate == 0.
  int dropout(int a, double rate, std::mt19937_64& rng);

  const Mat& value(int id) const { return nodes_[id].value; }
  int rows(int id) const { return static_cast<int>(nodes_[id].value.rows()); }
  int cols(int id) const { return static_cast<int>(nodes_[id].value.cols()); }

  // Requires a scalar (1x1) loss. Fills per-parameter gradients; parameters
  // not reachable from the loss get zero gradients.
  void backward(int loss);
  const std::map<std::string, Mat>& grads() const { return grads_; }

 private:
  enum class Op {
    kConstant, kParam, kMatmul, kAdd, kAddBias, kMul, kConcatCols, kConcatRows,
    kSigmoid, kTanh, kSoftmax, kMaskedSoftmax, kCrossEntropy, kSum, kScale,
    kSliceRows, kSliceCols, kDropout,
  };
  struct Node {
    Op op;
    int a = -1, b = -1;
    Mat value;
    Mat grad;
    Mat aux;                 // op-specific (mask, dropout mask)
    std::vector<int> gold;   // cross-entropy targets
    double scalar = 0.0;
    int i0 = 0, i1 = 0;      // slice bounds
    std::string name;        // parameter name
  };

  int push(Node node);
  void check_same_shape(const char* op, int a, int b) const;

  std::vector<Node> nodes_;
  std::map<std::string, int> params_;
  std::map<std::string, Mat> grads_;
};

// Central-difference gradient check. `build` must deterministically
// construct a scalar loss from the current parameter values and return
// (graph, loss id) by building into the supplied graph. Returns the max
// relative error over all parameter elements.
double grad_check(
    const std::function<int(Graph&, const std::map<std::string, Mat>&)>& build,
    std::map<std::string, Mat> params, double eps = 1e-5);

}  // namespace polysrl

#endif  // POLYSRL_GRAPH_H
