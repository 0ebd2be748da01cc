#include "voltwatch/tape.hpp"

#include "voltwatch/kernels.hpp"

namespace voltwatch::numerics {

namespace {
const kernels::KernelTable& K() { return kernels::active(); }
}  // namespace

// --- forward-only building blocks ------------------------------------------

Matrix affine(const Matrix& w, const Matrix& x, const Matrix& b) {
  if (!x.is_column() || !b.is_column())
    throw DimensionError("affine expects column vectors, got x " +
                         x.shape_string() + ", b " + b.shape_string());
  if (w.cols() != x.rows() || w.rows() != b.rows())
    throw DimensionError("affine shape mismatch: W " + w.shape_string() +
                         ", x " + x.shape_string() + ", b " +
                         b.shape_string());
  Matrix y(w.rows(), 1);
  K().matvec(w.data(), x.data(), y.data(), w.rows(), w.cols());
  K().add(y.data(), b.data(), y.data(), y.size());
  return y;
}

Matrix matvec(const Matrix& w, const Matrix& x) {
  if (!x.is_column() || w.cols() != x.rows())
    throw DimensionError("matvec shape mismatch: W " + w.shape_string() +
                         ", x " + x.shape_string());
  Matrix y(w.rows(), 1);
  K().matvec(w.data(), x.data(), y.data(), w.rows(), w.cols());
  return y;
}

Matrix activate(const Matrix& x, Activation kind) {
  Matrix y(x.rows(), x.cols());
  switch (kind) {
    case Activation::kSigmoid:
      K().sigmoid(x.data(), y.data(), x.size());
      break;
    case Activation::kTanh:
      K().vtanh(x.data(), y.data(), x.size());
      break;
    case Activation::kRelu:
      K().relu(x.data(), y.data(), x.size());
      break;
  }
  return y;
}

Matrix hadamard(const Matrix& a, const Matrix& b) {
  if (!a.same_shape(b))
    throw DimensionError("hadamard shape mismatch: " + a.shape_string() +
                         " vs " + b.shape_string());
  Matrix y(a.rows(), a.cols());
  K().mul(a.data(), b.data(), y.data(), a.size());
  return y;
}

Matrix add(const Matrix& a, const Matrix& b) {
  if (!a.same_shape(b))
    throw DimensionError("add shape mismatch: " + a.shape_string() + " vs " +
                         b.shape_string());
  Matrix y(a.rows(), a.cols());
  K().add(a.data(), b.data(), y.data(), a.size());
  return y;
}

Matrix concat_columns(const Matrix& a, const Matrix& b) {
  if (!a.is_column() || !b.is_column())
    throw DimensionError("concat expects column vectors, got " +
                         a.shape_string() + " and " + b.shape_string());
  Matrix y(a.rows() + b.rows(), 1);
  for (std::size_t i = 0; i < a.rows(); ++i) y[i] = a[i];
  for (std::size_t i = 0; i < b.rows(); ++i) y[a.rows() + i] = b[i];
  return y;
}

// --- tape forward -----------------------------------------------------------

Tape::Ref Tape::push(Node node, const char* what) {
  node.value.require_finite(what);
  nodes_.push_back(std::move(node));
  return Ref{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

Tape::Ref Tape::constant(Matrix value) {
  if (value.size() == 0) throw DimensionError("constant node must be non-empty");
  Node n;
  n.op = Op::kConstant;
  n.value = std::move(value);
  return push(std::move(n), "constant");
}

Tape::Ref Tape::param(const std::string& name) {
  if (params_ == nullptr)
    throw GraphError("parameter node '" + name +
                     "' requires a tape with a bound parameter store");
  Node n;
  n.op = Op::kParam;
  n.pname = name;
  n.value = params_->get(name);  // copy: tape values are immutable snapshots
  return push(std::move(n), "parameter");
}

Tape::Ref Tape::affine(Ref w, Ref x, Ref b) {
  Node n;
  n.op = Op::kAffine;
  n.a = w.index;
  n.b = x.index;
  n.c = b.index;
  n.value = numerics::affine(value(w), value(x), value(b));
  return push(std::move(n), "affine");
}

Tape::Ref Tape::matvec(Ref w, Ref x) {
  Node n;
  n.op = Op::kMatVec;
  n.a = w.index;
  n.b = x.index;
  n.value = numerics::matvec(value(w), value(x));
  return push(std::move(n), "matvec");
}

Tape::Ref Tape::activation(Ref x, Activation kind) {
  Node n;
  n.op = Op::kActivation;
  n.act = kind;
  n.a = x.index;
  n.value = numerics::activate(value(x), kind);
  return push(std::move(n), "activation");
}

Tape::Ref Tape::hadamard(Ref a, Ref b) {
  Node n;
  n.op = Op::kHadamard;
  n.a = a.index;
  n.b = b.index;
  n.value = numerics::hadamard(value(a), value(b));
  return push(std::move(n), "hadamard");
}

Tape::Ref Tape::add(Ref a, Ref b) {
  Node n;
  n.op = Op::kAdd;
  n.a = a.index;
  n.b = b.index;
  n.value = numerics::add(value(a), value(b));
  return push(std::move(n), "add");
}

Tape::Ref Tape::concat(Ref a, Ref b) {
  Node n;
  n.op = Op::kConcat;
  n.a = a.index;
  n.b = b.index;
  n.value = concat_columns(value(a), value(b));
  return push(std::move(n), "concat");
}

Tape::Ref Tape::sq_err(Ref x, Matrix target) {
  const Matrix& xv = value(x);
  if (!xv.same_shape(target))
    throw DimensionError("sq_err shape mismatch: " + xv.shape_string() +
                         " vs target " + target.shape_string());
  Node n;
  n.op = Op::kSqErr;
  n.a = x.index;
  n.value = Matrix(1, 1);
  n.value[0] = K().sq_err_sum(xv.data(), target.data(), xv.size());
  n.aux = std::move(target);
  return push(std::move(n), "sq_err");
}

Tape::Ref Tape::sum(const std::vector<Ref>& scalars) {
  if (scalars.empty()) throw DimensionError("sum needs at least one term");
  Node n;
  n.op = Op::kSum;
  n.value = Matrix(1, 1);
  double acc = 0.0;
  for (Ref r : scalars) {
    const Matrix& v = value(r);
    if (v.size() != 1)
      throw DimensionError("sum expects scalar terms, got " + v.shape_string());
    acc += v[0];
    n.list.push_back(r.index);
  }
  n.value[0] = acc;
  return push(std::move(n), "sum");
}

Tape::Ref Tape::scale(Ref a, double factor) {
  Node n;
  n.op = Op::kScale;
  n.a = a.index;
  n.factor = factor;
  const Matrix& av = value(a);
  n.value = Matrix(av.rows(), av.cols());
  K().scale(av.data(), factor, n.value.data(), av.size());
  return push(std::move(n), "scale");
}

double Tape::scalar(Ref r) const {
  const Matrix& v = value(r);
  if (v.size() != 1)
    throw GraphError("expected a scalar node, got " + v.shape_string());
  return v[0];
}

// --- tape backward ----------------------------------------------------------

GradientStore Tape::gradients(Ref loss) const {
  if (params_ == nullptr)
    throw GraphError("gradients require a tape with a bound parameter store");
  GradientStore sink = GradientStore::zeros_like(*params_);
  accumulate_gradients(loss, sink);
  return sink;
}

void Tape::accumulate_gradients(Ref loss, GradientStore& sink) const {
  const Node& top = node(loss);
  if (top.value.size() != 1)
    throw GraphError("gradient source must be a scalar node, got " +
                     top.value.shape_string());

  std::vector<Matrix> grad(nodes_.size());
  auto touched = [&](std::uint32_t i) -> Matrix& {
    if (grad[i].size() == 0) grad[i] = Matrix::zeros_like(nodes_[i].value);
    return grad[i];
  };

  grad[loss.index] = Matrix(1, 1);
  grad[loss.index][0] = 1.0;

  const auto& k = K();
  // Inputs always precede their consumers, so one reverse sweep suffices.
  for (std::uint32_t i = loss.index + 1; i-- > 0;) {
    if (grad[i].size() == 0) continue;  // node does not feed the loss
    const Node& n = nodes_[i];
    const Matrix& gy = grad[i];
    switch (n.op) {
      case Op::kConstant:
        break;
      case Op::kParam: {
        Matrix& dst = sink.at(n.pname);
        if (!dst.same_shape(gy))
          throw DimensionError("gradient shape mismatch for parameter '" +
                               n.pname + "'");
        k.axpy(1.0, gy.data(), dst.data(), dst.size());
        break;
      }
      case Op::kAffine: {
        const Matrix& w = nodes_[n.a].value;
        const Matrix& x = nodes_[n.b].value;
        k.ger_acc(touched(n.a).data(), gy.data(), x.data(), w.rows(), w.cols());
        k.matvec_t_acc(w.data(), gy.data(), touched(n.b).data(), w.rows(),
                       w.cols());
        k.axpy(1.0, gy.data(), touched(n.c).data(), gy.size());
        break;
      }
      case Op::kMatVec: {
        const Matrix& w = nodes_[n.a].value;
        const Matrix& x = nodes_[n.b].value;
        k.ger_acc(touched(n.a).data(), gy.data(), x.data(), w.rows(), w.cols());
        k.matvec_t_acc(w.data(), gy.data(), touched(n.b).data(), w.rows(),
                       w.cols());
        break;
      }
      case Op::kActivation: {
        Matrix& dx = touched(n.a);
        switch (n.act) {
          case Activation::kSigmoid:
            k.sigmoid_bwd_acc(n.value.data(), gy.data(), dx.data(), dx.size());
            break;
          case Activation::kTanh:
            k.tanh_bwd_acc(n.value.data(), gy.data(), dx.data(), dx.size());
            break;
          case Activation::kRelu:
            k.relu_bwd_acc(n.value.data(), gy.data(), dx.data(), dx.size());
            break;
        }
        break;
      }
      case Op::kHadamard: {
        k.mul_acc(gy.data(), nodes_[n.b].value.data(), touched(n.a).data(),
                  gy.size());
        k.mul_acc(gy.data(), nodes_[n.a].value.data(), touched(n.b).data(),
                  gy.size());
        break;
      }
      case Op::kAdd: {
        k.axpy(1.0, gy.data(), touched(n.a).data(), gy.size());
        k.axpy(1.0, gy.data(), touched(n.b).data(), gy.size());
        break;
      }
      case Op::kConcat: {
        Matrix& da = touched(n.a);
        Matrix& db = touched(n.b);
        k.axpy(1.0, gy.data(), da.data(), da.size());
        k.axpy(1.0, gy.data() + da.size(), db.data(), db.size());
        break;
      }
      case Op::kSqErr: {
        const Matrix& x = nodes_[n.a].value;
        Matrix diff(x.rows(), x.cols());
        k.sub(x.data(), n.aux.data(), diff.data(), x.size());
        k.axpy(2.0 * gy[0], diff.data(), touched(n.a).data(), diff.size());
        break;
      }
      case Op::kSum: {
        for (std::uint32_t t : n.list) touched(t)[0] += gy[0];
        break;
      }
      case Op::kScale: {
        k.axpy(n.factor, gy.data(), touched(n.a).data(), gy.size());
        break;
      }
      default:
        throw GraphError("unsupported operation in gradient graph");
    }
  }
}

GradientResult gradient_of(const ParameterStore& params,
                           const std::function<Tape::Ref(Tape&)>& build) {
  Tape tape(&params);
  const Tape::Ref loss = build(tape);
  GradientResult out;
  out.loss = tape.scalar(loss);
  out.gradients = tape.gradients(loss);
  return out;
}

double loss_value(const ParameterStore& params,
                  const std::function<Tape::Ref(Tape&)>& build) {
  Tape tape(&params);
  return tape.scalar(build(tape));
}

}  // namespace voltwatch::numerics
