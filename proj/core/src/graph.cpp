#include "polysrl/graph.h"

#include <cmath>

namespace polysrl {

namespace {
constexpr double kMaskPenalty = 1e30;  // additive mask before softmax
}

int Graph::push(Node node) {
  nodes_.push_back(std::move(node));
  return static_cast<int>(nodes_.size()) - 1;
}

void Graph::check_same_shape(const char* op, int a, int b) const {
  const Mat& va = nodes_[a].value;
  const Mat& vb = nodes_[b].value;
  if (va.rows() != vb.rows() || va.cols() != vb.cols()) {
    throw GraphError(std::string(op) + ": shape mismatch " +
                     std::to_string(va.rows()) + "x" + std::to_string(va.cols()) +
                     " vs " + std::to_string(vb.rows()) + "x" +
                     std::to_string(vb.cols()));
  }
}

int Graph::constant(const Mat& value) {
  Node n;
  n.op = Op::kConstant;
  n.value = value;
  return push(std::move(n));
}

int Graph::param(const std::string& name, const Mat& value) {
  auto it = params_.find(name);
  if (it != params_.end()) return it->second;
  Node n;
  n.op = Op::kParam;
  n.value = value;
  n.name = name;
  int id = push(std::move(n));
  params_[name] = id;
  return id;
}

int Graph::matmul(int a, int b) {
  if (nodes_[a].value.cols() != nodes_[b].value.rows()) {
    throw GraphError("matmul: inner dims " + std::to_string(nodes_[a].value.cols()) +
                     " vs " + std::to_string(nodes_[b].value.rows()));
  }
  Node n;
  n.op = Op::kMatmul;
  n.a = a;
  n.b = b;
  n.value = nodes_[a].value * nodes_[b].value;
  return push(std::move(n));
}

int Graph::add(int a, int b) {
  Node n;
  n.a = a;
  n.b = b;
  if (nodes_[b].value.rows() == 1 && nodes_[a].value.rows() != 1 &&
      nodes_[a].value.cols() == nodes_[b].value.cols()) {
    n.op = Op::kAddBias;
    n.value = nodes_[a].value.rowwise() + nodes_[b].value.row(0);
  } else {
    check_same_shape("add", a, b);
    n.op = Op::kAdd;
    n.value = nodes_[a].value + nodes_[b].value;
  }
  return push(std::move(n));
}

int Graph::mul(int a, int b) {
  check_same_shape("mul", a, b);
  Node n;
  n.op = Op::kMul;
  n.a = a;
  n.b = b;
  n.value = nodes_[a].value.cwiseProduct(nodes_[b].value);
  return push(std::move(n));
}

int Graph::concat_cols(int a, int b) {
  if (nodes_[a].value.rows() != nodes_[b].value.rows()) {
    throw GraphError("concat_cols: row counts differ");
  }
  Node n;
  n.op = Op::kConcatCols;
  n.a = a;
  n.b = b;
  n.value.resize(nodes_[a].value.rows(), nodes_[a].value.cols() + nodes_[b].value.cols());
  n.value << nodes_[a].value, nodes_[b].value;
  return push(std::move(n));
}

int Graph::concat_rows(int a, int b) {
  if (nodes_[a].value.cols() != nodes_[b].value.cols()) {
    throw GraphError("concat_rows: column counts differ");
  }
  Node n;
  n.op = Op::kConcatRows;
  n.a = a;
  n.b = b;
  n.value.resize(nodes_[a].value.rows() + nodes_[b].value.rows(), nodes_[a].value.cols());
  n.value << nodes_[a].value, nodes_[b].value;
  return push(std::move(n));
}

int Graph::sigmoid(int a) {
  Node n;
  n.op = Op::kSigmoid;
  n.a = a;
  n.value = nodes_[a].value.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
  return push(std::move(n));
}

int Graph::tanh(int a) {
  Node n;
  n.op = Op::kTanh;
  n.a = a;
  n.value = nodes_[a].value.array().tanh();
  return push(std::move(n));
}

int Graph::softmax_rows(int a) {
  return masked_softmax_rows(a, Mat::Zero(nodes_[a].value.rows(), nodes_[a].value.cols()));
}

int Graph::masked_softmax_rows(int a, const Mat& mask) {
  const Mat& v = nodes_[a].value;
  if (mask.rows() != v.rows() || mask.cols() != v.cols()) {
    throw GraphError("masked_softmax: mask shape mismatch");
  }
  Node n;
  n.op = mask.isZero(0) ? Op::kSoftmax : Op::kMaskedSoftmax;
  n.a = a;
  n.aux = mask;
  n.value.resizeLike(v);
  for (int r = 0; r < v.rows(); ++r) {
    Eigen::RowVectorXd z = v.row(r);
    bool any = false;
    for (int c = 0; c < v.cols(); ++c) {
      if (mask(r, c) != 0.0) {
        z(c) -= kMaskPenalty;
      } else {
        any = true;
      }
    }
    if (!any) throw GraphError("masked_softmax: fully masked row " + std::to_string(r));
    double m = z.maxCoeff();
    Eigen::RowVectorXd e = (z.array() - m).exp();
    n.value.row(r) = e / e.sum();
  }
  return push(std::move(n));
}

int Graph::cross_entropy(int probs, const std::vector<int>& gold) {
  const Mat& p = nodes_[probs].value;
  if (static_cast<int>(gold.size()) != p.rows()) {
    throw GraphError("cross_entropy: " + std::to_string(gold.size()) + " targets for " +
                     std::to_string(p.rows()) + " rows");
  }
  double loss = 0.0;
  for (int r = 0; r < p.rows(); ++r) {
    if (gold[r] < 0) continue;
    if (gold[r] >= p.cols()) throw GraphError("cross_entropy: target out of range");
    loss -= std::log(std::max(p(r, gold[r]), 1e-300));
  }
  Node n;
  n.op = Op::kCrossEntropy;
  n.a = probs;
  n.gold = gold;
  n.value = Mat::Constant(1, 1, loss);
  return push(std::move(n));
}

int Graph::sum(int a) {
  Node n;
  n.op = Op::kSum;
  n.a = a;
  n.value = Mat::Constant(1, 1, nodes_[a].value.sum());
  return push(std::move(n));
}

int Graph::scale(int a, double c) {
  Node n;
  n.op = Op::kScale;
  n.a = a;
  n.scalar = c;
  n.value = nodes_[a].value * c;
  return push(std::move(n));
}

int Graph::slice_rows(int a, int row0, int row1) {
  if (row0 < 0 || row1 > nodes_[a].value.rows() || row0 >= row1) {
    throw GraphError("slice_rows: bad range");
  }
  Node n;
  n.op = Op::kSliceRows;
  n.a = a;
  n.i0 = row0;
  n.i1 = row1;
  n.value = nodes_[a].value.middleRows(row0, row1 - row0);
  return push(std::move(n));
}

int Graph::slice_cols(int a, int col0, int col1) {
  if (col0 < 0 || col1 > nodes_[a].value.cols() || col0 >= col1) {
    throw GraphError("slice_cols: bad range");
  }
  Node n;
  n.op = Op::kSliceCols;
  n.a = a;
  n.i0 = col0;
  n.i1 = col1;
  n.value = nodes_[a].value.middleCols(col0, col1 - col0);
  return push(std::move(n));
}

int Graph::dropout(int a, double rate, std::mt19937_64& rng) {
  if (rate <= 0.0) return a;
  if (rate >= 1.0) throw GraphError("dropout: rate must be < 1");
  const Mat& v = nodes_[a].value;
  std::bernoulli_distribution keep(1.0 - rate);
  Mat mask(v.rows(), v.cols());
  for (int r = 0; r < v.rows(); ++r)
    for (int c = 0; c < v.cols(); ++c)
      mask(r, c) = keep(rng) ? 1.0 / (1.0 - rate) : 0.0;
  Node n;
  n.op = Op::kDropout;
  n.a = a;
  n.aux = mask;
  n.value = v.cwiseProduct(mask);
  return push(std::move(n));
}

void Graph::backward(int loss) {
  if (nodes_[loss].value.rows() != 1 || nodes_[loss].value.cols() != 1) {
    throw GraphError("backward: loss must be scalar, got " +
                     std::to_string(nodes_[loss].value.rows()) + "x" +
                     std::to_string(nodes_[loss].value.cols()));
  }
  for (Node& n : nodes_) n.grad = Mat::Zero(n.value.rows(), n.value.cols());
  nodes_[loss].grad(0, 0) = 1.0;
  for (int id = loss; id >= 0; --id) {
    Node& n = nodes_[id];
    const Mat& g = n.grad;
    if (g.isZero(0)) continue;
    switch (n.op) {
      case Op::kConstant:
      case Op::kParam:
        break;
      case Op::kMatmul:
        nodes_[n.a].grad += g * nodes_[n.b].value.transpose();
        nodes_[n.b].grad += nodes_[n.a].value.transpose() * g;
        break;
      case Op::kAdd:
        nodes_[n.a].grad += g;
        nodes_[n.b].grad += g;
        break;
      case Op::kAddBias:
        nodes_[n.a].grad += g;
        nodes_[n.b].grad.row(0) += g.colwise().sum();
        break;
      case Op::kMul:
        nodes_[n.a].grad += g.cwiseProduct(nodes_[n.b].value);
        nodes_[n.b].grad += g.cwiseProduct(nodes_[n.a].value);
        break;
      case Op::kConcatCols:
        nodes_[n.a].grad += g.leftCols(nodes_[n.a].value.cols());
        nodes_[n.b].grad += g.rightCols(nodes_[n.b].value.cols());
        break;
      case Op::kConcatRows:
        nodes_[n.a].grad += g.topRows(nodes_[n.a].value.rows());
        nodes_[n.b].grad += g.bottomRows(nodes_[n.b].value.rows());
        break;
      case Op::kSigmoid:
        nodes_[n.a].grad +=
            g.cwiseProduct(n.value.cwiseProduct((1.0 - n.value.array()).matrix()));
        break;
      case Op::kTanh:
        nodes_[n.a].grad +=
            g.cwiseProduct((1.0 - n.value.array().square()).matrix());
        break;
      case Op::kSoftmax:
      case Op::kMaskedSoftmax:
        // dz = p .* (g - sum(g .* p) per row); masked entries have p ~ 0.
        for (int r = 0; r < n.value.rows(); ++r) {
          double dot = g.row(r).dot(n.value.row(r));
          nodes_[n.a].grad.row(r) +=
              n.value.row(r).cwiseProduct(g.row(r).array().matrix()) -
              dot * n.value.row(r);
        }
        break;
      case Op::kCrossEntropy: {
        double gs = g(0, 0);
        const Mat& p = nodes_[n.a].value;
        for (int r = 0; r < p.rows(); ++r) {
          if (n.gold[r] < 0) continue;
          nodes_[n.a].grad(r, n.gold[r]) -= gs / std::max(p(r, n.gold[r]), 1e-300);
        }
        break;
      }
      case Op::kSum:
        nodes_[n.a].grad.array() += g(0, 0);
        break;
      case Op::kScale:
        nodes_[n.a].grad += g * n.scalar;
        break;
      case Op::kSliceRows:
        nodes_[n.a].grad.middleRows(n.i0, n.i1 - n.i0) += g;
        break;
      case Op::kSliceCols:
        nodes_[n.a].grad.middleCols(n.i0, n.i1 - n.i0) += g;
        break;
      case Op::kDropout:
        nodes_[n.a].grad += g.cwiseProduct(n.aux);
        break;
    }
  }
  grads_.clear();
  for (const auto& [name, id] : params_) grads_[name] = nodes_[id].grad;
}

double grad_check(
    const std::function<int(Graph&, const std::map<std::string, Mat>&)>& build,
    std::map<std::string, Mat> params, double eps) {
  Graph g;
  int loss = build(g, params);
  g.backward(loss);
  std::map<std::string, Mat> analytic = g.grads();

  double max_rel = 0.0;
  for (auto& [name, value] : params) {
    for (int r = 0; r < value.rows(); ++r) {
      for (int c = 0; c < value.cols(); ++c) {
        double saved = value(r, c);
        value(r, c) = saved + eps;
        Graph gp;
        double fp = gp.value(build(gp, params))(0, 0);
        value(r, c) = saved - eps;
        Graph gm;
        double fm = gm.value(build(gm, params))(0, 0);
        value(r, c) = saved;
        double numeric = (fp - fm) / (2.0 * eps);
        double a = analytic.count(name) ? analytic[name](r, c) : 0.0;
        double rel = std::abs(a - numeric) /
                     std::max({std::abs(a), std::abs(numeric), 1e-8});
        max_rel = std::max(max_rel, rel);
      }
    }
  }
  return max_rel;
}

}  // namespace polysrl
