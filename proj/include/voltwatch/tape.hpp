#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "voltwatch/matrix.hpp"

namespace voltwatch::numerics {

enum class Activation : std::uint8_t { kSigmoid, kTanh, kRelu };

// --- forward-only building blocks (no graph, no gradients) -----------------

// y = W x + b for a column vector x.
Matrix affine(const Matrix& w, const Matrix& x, const Matrix& b);
Matrix matvec(const Matrix& w, const Matrix& x);
Matrix activate(const Matrix& x, Activation kind);
Matrix hadamard(const Matrix& a, const Matrix& b);
Matrix add(const Matrix& a, const Matrix& b);
Matrix concat_columns(const Matrix& a, const Matrix& b);

// ---------------------------------------------------------------------------
// Reverse-mode automatic differentiation.
//
// A Tape records the forward computation as a flat list of nodes
// (define-by-run).  Values are computed eagerly; gradients flow in one
// reverse sweep from a scalar node.  Parameter nodes pull their values from a
// bound ParameterStore and deposit gradients into a GradientStore keyed by
// the same names.  Every forward value is checked for NaN/Inf the moment it
// is produced, so numerical blow-ups fail loudly at their source.
// ---------------------------------------------------------------------------

class Tape {
 public:
  struct Ref {
    std::uint32_t index = 0;
  };

  explicit Tape(const ParameterStore* params = nullptr) : params_(params) {}

  Ref constant(Matrix value);
  Ref param(const std::string& name);

  Ref affine(Ref w, Ref x, Ref b);  // W x + b
  Ref matvec(Ref w, Ref x);
  Ref activation(Ref x, Activation kind);
  Ref hadamard(Ref a, Ref b);
  Ref add(Ref a, Ref b);
  Ref concat(Ref a, Ref b);  // stack two column vectors
  // Scalar node: sum of squared differences against a fixed target.
  Ref sq_err(Ref x, Matrix target);
  // Scalar node: sum of scalar nodes.
  Ref sum(const std::vector<Ref>& scalars);
  Ref scale(Ref a, double factor);

  const Matrix& value(Ref r) const { return nodes_[r.index].value; }
  double scalar(Ref r) const;
  std::size_t node_count() const { return nodes_.size(); }

  // Backward from a scalar node; returns dLoss/dParam for every parameter in
  // the bound store (zero for parameters the graph never touched).
  GradientStore gradients(Ref loss) const;
  // Same, but adds into an existing store (for mini-batch accumulation).
  void accumulate_gradients(Ref loss, GradientStore& sink) const;

 private:
  enum class Op : std::uint8_t {
    kConstant,
    kParam,
    kAffine,
    kMatVec,
    kActivation,
    kHadamard,
    kAdd,
    kConcat,
    kSqErr,
    kSum,
    kScale,
  };

  struct Node {
    Op op;
    Activation act = Activation::kSigmoid;
    std::uint32_t a = 0;
    std::uint32_t b = 0;
    std::uint32_t c = 0;
    std::vector<std::uint32_t> list;  // kSum terms
    double factor = 0.0;              // kScale
    std::string pname;                // kParam
    Matrix aux;                       // kSqErr target
    Matrix value;
  };

  Ref push(Node node, const char* what);
  const Node& node(Ref r) const { return nodes_[r.index]; }

  const ParameterStore* params_;
  std::vector<Node> nodes_;
};

struct GradientResult {
  double loss = 0.0;
  GradientStore gradients;
};

// Builds the graph via `build` (which returns the scalar loss node), then
// runs one forward+backward pass.
GradientResult gradient_of(const ParameterStore& params,
                           const std::function<Tape::Ref(Tape&)>& build);

// Forward pass only; handy for finite-difference probes.
double loss_value(const ParameterStore& params,
                  const std::function<Tape::Ref(Tape&)>& build);

}  // namespace voltwatch::numerics
