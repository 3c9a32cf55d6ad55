#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace axg {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

// Dense row-major float32 array. `grad` is only populated by Graph::backward.
struct Tensor {
  Shape shape;
  std::vector<float> data;
  bool requires_grad = false;
  std::optional<std::vector<float>> grad;

  Tensor() = default;
  explicit Tensor(Shape s);
  Tensor(Shape s, std::vector<float> values);

  static Tensor scalar(float v) { return Tensor({1}, {v}); }

  std::size_t numel() const { return data.size(); }
  std::size_t rank() const { return shape.size(); }
  std::size_t dim(std::size_t i) const { return shape.at(i); }
  float item() const;
};

enum class Op : std::uint8_t {
  Leaf,
  MatMul,
  Conv1d,
  Conv1dTranspose,
  Tanh,
  Elu,
  Relu,
  Scale,
  Add,
  Sub,
  Mul,
  Square,
  Sum,
  Mean,
  MeanRows,
  AddBias,
  Transpose,
  Reshape,
  PadTime,
  SliceTime,
  SoftmaxCrossEntropy,
  Pick,
};

std::string_view op_name(Op op);

class Graph;

// Handle to a node of a Graph. Cheap to copy; valid as long as the graph lives.
class Var {
 public:
  Var() = default;
  Var(Graph* graph, std::size_t id) : graph_(graph), id_(id) {}

  Graph& graph() const { return *graph_; }
  std::size_t id() const { return id_; }
  const Tensor& value() const;
  const Shape& shape() const { return value().shape; }
  // Throws ContractError when no gradient reached this node.
  const std::vector<float>& grad() const;

 private:
  Graph* graph_ = nullptr;
  std::size_t id_ = 0;
};

// Define-by-run tape. Nodes are appended in evaluation order, so the node list is
// topologically sorted by construction and backward walks it in exact reverse.
class Graph {
 public:
  using BackwardFn = std::function<void(Graph&, std::size_t)>;

  struct Node {
    Op op = Op::Leaf;
    std::vector<std::size_t> inputs;
    Tensor value;
    BackwardFn backward;
  };

  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Var leaf(Tensor value, bool requires_grad = false);
  Var constant(Tensor value) { return leaf(std::move(value), false); }

  // Populates grad on every node that requires it. `loss` must hold exactly one element.
  void backward(Var loss);

  std::size_t size() const { return nodes_.size(); }
  const Node& node(std::size_t id) const { return nodes_.at(id); }
  std::vector<std::size_t> parameter_ids() const;
  const std::vector<std::size_t>& last_backward_order() const { return backward_order_; }

  // Used by op implementations.
  Var record(Op op, std::vector<std::size_t> inputs, Tensor value, BackwardFn backward);
  const Tensor& value(std::size_t id) const { return nodes_[id].value; }
  const std::vector<float>& upstream(std::size_t id) const { return *nodes_[id].value.grad; }
  // Gradient buffer of an input, or nullptr when that input does not require grad.
  std::vector<float>* grad_sink(std::size_t id);

 private:
  std::vector<Node> nodes_;
  std::vector<std::size_t> backward_order_;
};

// Differentiable operations. Matrix shapes are [rows x cols]; conv layouts are
// [channels x time], conv weights [C_out x C_in x K] (transpose: [C_in x C_out x K]).
Var matmul(Var a, Var b);
Var conv1d(Var input, Var kernels, std::size_t stride);
Var conv1d(Var input, Var kernels, Var bias, std::size_t stride);
Var conv1d_transpose(Var input, Var kernels, std::size_t stride);
Var conv1d_transpose(Var input, Var kernels, Var bias, std::size_t stride);
Var tanh(Var x);
Var elu(Var x);  // alpha = 1
Var relu(Var x);
Var scale(Var x, float c);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var square(Var x);
Var sum(Var x);
Var mean(Var x);
Var mean_rows(Var x);                // [m x n] -> [1 x n]
Var add_bias(Var x, Var bias);       // [m x n] + [n], broadcast over rows
Var transpose(Var x);                // 2-D only
Var reshape(Var x, Shape shape);
Var pad_time(Var x, std::size_t left, std::size_t right);       // zero pad along the last axis of [C x N]
Var slice_time(Var x, std::size_t begin, std::size_t length);   // along the last axis of [C x N]
Var softmax_cross_entropy(Var logits, std::size_t label);
Var pick(Var x, std::size_t flat_index);

// Raw kernels shared by the graph ops and tests.
namespace kernels {

std::size_t conv_output_length(std::size_t n, std::size_t k, std::size_t stride);

// y[Cout x Nout] += valid strided cross-correlation of x[Cin x N] with w[Cout x Cin x K].
void conv_forward(std::span<const float> x, std::size_t cin, std::size_t n, std::span<const float> w,
                  std::size_t cout, std::size_t k, std::size_t stride, std::span<float> y);
// gx[Cin x N] += adjoint of conv_forward applied to gy[Cout x Nout].
void conv_backward_input(std::span<const float> gy, std::size_t cout, std::size_t nout,
                         std::span<const float> w, std::size_t cin, std::size_t k,
                         std::size_t stride, std::span<float> gx, std::size_t n);
// gw[Cout x Cin x K] += d<y, gy>/dw.
void conv_backward_weight(std::span<const float> gy, std::size_t cout, std::size_t nout,
                          std::span<const float> x, std::size_t cin, std::size_t n,
                          std::size_t k, std::size_t stride, std::span<float> gw);

}  // namespace kernels

}  // namespace axg
