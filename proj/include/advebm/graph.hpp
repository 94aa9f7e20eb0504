#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "advebm/error.hpp"
#include "advebm/tensor.hpp"

namespace advebm {

// Static computation graph over dense tensors with reverse-mode
// differentiation. Graphs are built once per architecture and are immutable
// during evaluation; every forward/backward call owns its workspace, so
// concurrent calls over a shared graph and shared read-only parameters are
// safe.
class Graph {
 public:
  using NodeId = std::uint32_t;

  enum class Op : std::uint8_t {
    input,
    param,
    matmul,
    add,
    sub,
    mul,
    scale,
    emax,
    exp,
    log,
    softplus,
    reshape,
    reduce_sum,
    logsumexp,
    conv2d,
    avgpool2,
  };

  static const char* op_name(Op op) {
    switch (op) {
      case Op::input: return "input";
      case Op::param: return "param";
      case Op::matmul: return "matmul";
      case Op::add: return "add";
      case Op::sub: return "sub";
      case Op::mul: return "mul";
      case Op::scale: return "scale";
      case Op::emax: return "emax";
      case Op::exp: return "exp";
      case Op::log: return "log";
      case Op::softplus: return "softplus";
      case Op::reshape: return "reshape";
      case Op::reduce_sum: return "reduce_sum";
      case Op::logsumexp: return "logsumexp";
      case Op::conv2d: return "conv2d";
      case Op::avgpool2: return "avgpool2";
    }
    return "?";
  }

  struct Node {
    Op op;
    std::vector<NodeId> args;
    Shape shape;
    std::string label;  // leaf name or layer label; may be empty
    double c = 0.0;     // scale constant
    int pad = 0;        // conv2d padding
  };

  // ---- leaves ----

  NodeId input(std::string name, Shape shape) {
    if (inputs_.count(name)) throw ValueError("graph: duplicate input name '" + name + "'");
    NodeId id = push({Op::input, {}, std::move(shape), name});
    inputs_.emplace(std::move(name), id);
    return id;
  }

  NodeId param(std::string name, Shape shape) {
    if (params_.count(name)) throw ValueError("graph: duplicate param name '" + name + "'");
    NodeId id = push({Op::param, {}, std::move(shape), name});
    params_.emplace(std::move(name), id);
    return id;
  }

  // ---- primitives ----

  NodeId matmul(NodeId a, NodeId b, std::string label = "") {
    const Shape& sa = shape_of(a);
    const Shape& sb = shape_of(b);
    Shape out;
    if (sa.size() == 2 && sb.size() == 2) {
      if (sa[1] != sb[0]) throw build_shape_error("matmul", label, sa, sb);
      out = {sa[0], sb[1]};
    } else if (sa.size() == 2 && sb.size() == 1) {
      if (sa[1] != sb[0]) throw build_shape_error("matmul", label, sa, sb);
      out = {sa[0]};
    } else if (sa.size() == 1 && sb.size() == 2) {
      if (sa[0] != sb[0]) throw build_shape_error("matmul", label, sa, sb);
      out = {sb[1]};
    } else {
      throw build_shape_error("matmul", label, sa, sb);
    }
    return push({Op::matmul, {a, b}, std::move(out), std::move(label)});
  }

  NodeId add(NodeId a, NodeId b, std::string label = "") { return binary(Op::add, a, b, std::move(label)); }
  NodeId sub(NodeId a, NodeId b, std::string label = "") { return binary(Op::sub, a, b, std::move(label)); }
  NodeId mul(NodeId a, NodeId b, std::string label = "") { return binary(Op::mul, a, b, std::move(label)); }
  NodeId emax(NodeId a, NodeId b, std::string label = "") { return binary(Op::emax, a, b, std::move(label)); }

  NodeId scale(NodeId a, double c, std::string label = "") {
    Node n{Op::scale, {a}, shape_of(a), std::move(label)};
    n.c = c;
    return push(std::move(n));
  }

  NodeId exp(NodeId a, std::string label = "") { return push({Op::exp, {a}, shape_of(a), std::move(label)}); }
  NodeId log(NodeId a, std::string label = "") { return push({Op::log, {a}, shape_of(a), std::move(label)}); }
  NodeId softplus(NodeId a, std::string label = "") {
    return push({Op::softplus, {a}, shape_of(a), std::move(label)});
  }

  NodeId reshape(NodeId a, Shape shape, std::string label = "") {
    if (shape_numel(shape) != shape_numel(shape_of(a)))
      throw ShapeError(describe_new("reshape", label),
                       "cannot reshape " + shape_str(shape_of(a)) + " to " + shape_str(shape));
    return push({Op::reshape, {a}, std::move(shape), std::move(label)});
  }

  NodeId reduce_sum(NodeId a, std::string label = "") {
    return push({Op::reduce_sum, {a}, {1}, std::move(label)});
  }

  NodeId logsumexp(NodeId a, std::string label = "") {
    return push({Op::logsumexp, {a}, {1}, std::move(label)});
  }

  // x: [Ci,H,W], w: [Co,Ci,kh,kw], b: [Co]; stride 1, zero padding `pad`
  NodeId conv2d(NodeId x, NodeId w, NodeId b, int pad, std::string label = "") {
    const Shape& sx = shape_of(x);
    const Shape& sw = shape_of(w);
    const Shape& sb = shape_of(b);
    if (sx.size() != 3 || sw.size() != 4 || sb.size() != 1 || sw[1] != sx[0] || sb[0] != sw[0])
      throw ShapeError(describe_new("conv2d", label), "incompatible shapes x" + shape_str(sx) + " w" +
                                                          shape_str(sw) + " b" + shape_str(sb));
    const std::size_t h = sx[1] + 2 * static_cast<std::size_t>(pad);
    const std::size_t wd = sx[2] + 2 * static_cast<std::size_t>(pad);
    if (h < sw[2] || wd < sw[3])
      throw ShapeError(describe_new("conv2d", label), "kernel larger than padded input");
    Node n{Op::conv2d, {x, w, b}, {sw[0], h - sw[2] + 1, wd - sw[3] + 1}, std::move(label)};
    n.pad = pad;
    return push(std::move(n));
  }

  // 2x2 non-overlapping mean pooling; H and W must be even
  NodeId avgpool2(NodeId a, std::string label = "") {
    const Shape& s = shape_of(a);
    if (s.size() != 3 || s[1] % 2 != 0 || s[2] % 2 != 0)
      throw ShapeError(describe_new("avgpool2", label), "requires [C,H,W] with even H,W, got " + shape_str(s));
    return push({Op::avgpool2, {a}, {s[0], s[1] / 2, s[2] / 2}, std::move(label)});
  }

  void mark_output(const std::string& name, NodeId id) {
    check_id(id);
    outputs_[name] = id;
  }

  // ---- introspection ----

  std::size_t node_count() const { return nodes_.size(); }
  const Node& node(NodeId id) const { return nodes_[id]; }
  const Shape& shape_of(NodeId id) const {
    check_id(id);
    return nodes_[id].shape;
  }
  const std::map<std::string, NodeId>& inputs() const { return inputs_; }
  const std::map<std::string, NodeId>& params() const { return params_; }
  const std::map<std::string, NodeId>& outputs() const { return outputs_; }

  NodeId output_id(const std::string& name) const {
    auto it = outputs_.find(name);
    if (it == outputs_.end()) throw ValueError("graph: no output named '" + name + "'");
    return it->second;
  }

  std::string describe(NodeId id) const {
    const Node& n = nodes_[id];
    std::string s = std::string(op_name(n.op)) + "#" + std::to_string(id);
    if (!n.label.empty()) s += "(" + n.label + ")";
    return s;
  }

  // ---- evaluation ----

  // Evaluates every node. `leaf` is indexed by NodeId; entries for all input
  // and param nodes must be non-null and shape-consistent.
  void eval(const std::vector<const Tensor*>& leaf, std::vector<Tensor>& vals) const {
    vals.resize(nodes_.size());
    for (NodeId i = 0; i < nodes_.size(); ++i) {
      const Node& n = nodes_[i];
      if (n.op == Op::input || n.op == Op::param) {
        const Tensor* t = i < leaf.size() ? leaf[i] : nullptr;
        if (t == nullptr) throw ValueError("graph: leaf '" + n.label + "' is not bound");
        if (t->shape != n.shape)
          throw ShapeError(describe(i),
                           "bound tensor has shape " + shape_str(t->shape) + ", expected " + shape_str(n.shape));
        vals[i] = *t;
      } else {
        eval_node(i, vals);
      }
      for (double v : vals[i].data)
        if (!std::isfinite(v)) throw NumericError(describe(i), "non-finite value in forward pass");
    }
  }

  // Reverse sweep from a scalar seed node over previously computed values.
  // grads is indexed by NodeId; untouched nodes are left with empty tensors.
  void eval_backward(NodeId seed, const std::vector<Tensor>& vals, std::vector<Tensor>& grads) const {
    check_id(seed);
    if (shape_numel(nodes_[seed].shape) != 1)
      throw ShapeError(describe(seed), "backward seed must be scalar, shape " + shape_str(nodes_[seed].shape));
    grads.assign(nodes_.size(), Tensor{});
    grads[seed] = Tensor::scalar(1.0);
    for (NodeId i = seed + 1; i-- > 0;) {
      if (grads[i].data.empty()) continue;
      backprop_node(i, vals, grads);
    }
  }

  // ---- named-map convenience API (tests, small callers) ----

  std::map<std::string, Tensor> forward(const std::map<std::string, Tensor>& bound) const {
    std::vector<const Tensor*> leaf;
    bind(bound, leaf);
    std::vector<Tensor> vals;
    eval(leaf, vals);
    std::map<std::string, Tensor> out;
    for (const auto& [name, id] : outputs_) out.emplace(name, vals[id]);
    return out;
  }

  // Gradient of the named scalar output w.r.t. every input and param tensor.
  // Leaves unreachable from the seed get zero gradients.
  std::map<std::string, Tensor> backward(const std::map<std::string, Tensor>& bound,
                                         const std::string& seed_output) const {
    std::vector<const Tensor*> leaf;
    bind(bound, leaf);
    std::vector<Tensor> vals, grads;
    eval(leaf, vals);
    eval_backward(output_id(seed_output), vals, grads);
    std::map<std::string, Tensor> out;
    auto take = [&](const std::map<std::string, NodeId>& leaves) {
      for (const auto& [name, id] : leaves)
        out.emplace(name, grads[id].data.empty() ? Tensor::zeros(nodes_[id].shape) : grads[id]);
    };
    take(inputs_);
    take(params_);
    return out;
  }

  void bind(const std::map<std::string, Tensor>& bound, std::vector<const Tensor*>& leaf) const {
    leaf.assign(nodes_.size(), nullptr);
    for (const auto& [name, id] : inputs_) {
      auto it = bound.find(name);
      if (it == bound.end()) throw ValueError("graph: input '" + name + "' is not bound");
      leaf[id] = &it->second;
    }
    for (const auto& [name, id] : params_) {
      auto it = bound.find(name);
      if (it == bound.end()) throw ValueError("graph: param '" + name + "' is not bound");
      leaf[id] = &it->second;
    }
  }

 private:
  std::vector<Node> nodes_;
  std::map<std::string, NodeId> inputs_, params_, outputs_;

  NodeId push(Node n) {
    nodes_.push_back(std::move(n));
    return static_cast<NodeId>(nodes_.size() - 1);
  }

  void check_id(NodeId id) const {
    if (id >= nodes_.size()) throw ValueError("graph: invalid node id " + std::to_string(id));
  }

  NodeId binary(Op op, NodeId a, NodeId b, std::string label) {
    const Shape& sa = shape_of(a);
    const Shape& sb = shape_of(b);
    if (sa != sb) throw build_shape_error(op_name(op), label, sa, sb);
    return push({op, {a, b}, sa, std::move(label)});
  }

  ShapeError build_shape_error(const std::string& op, const std::string& label, const Shape& a,
                               const Shape& b) const {
    return ShapeError(describe_new(op, label), "incompatible shapes " + shape_str(a) + " and " + shape_str(b));
  }

  std::string describe_new(const std::string& op, const std::string& label) const {
    std::string s = op + "#" + std::to_string(nodes_.size());
    if (!label.empty()) s += "(" + label + ")";
    return s;
  }

  void eval_node(NodeId i, std::vector<Tensor>& vals) const {
    const Node& n = nodes_[i];
    switch (n.op) {
      case Op::matmul: {
        const Tensor& a = vals[n.args[0]];
        const Tensor& b = vals[n.args[1]];
        Tensor out(n.shape);
        if (a.ndim() == 2 && b.ndim() == 2) {
          const std::size_t m = a.shape[0], k = a.shape[1], p = b.shape[1];
          for (std::size_t r = 0; r < m; ++r)
            for (std::size_t c = 0; c < p; ++c) {
              double s = 0.0;
              for (std::size_t j = 0; j < k; ++j) s += a[r * k + j] * b[j * p + c];
              out[r * p + c] = s;
            }
        } else if (a.ndim() == 2 && b.ndim() == 1) {
          const std::size_t m = a.shape[0], k = a.shape[1];
          for (std::size_t r = 0; r < m; ++r) {
            double s = 0.0;
            for (std::size_t j = 0; j < k; ++j) s += a[r * k + j] * b[j];
            out[r] = s;
          }
        } else {  // 1D x 2D
          const std::size_t k = a.shape[0], p = b.shape[1];
          for (std::size_t c = 0; c < p; ++c) {
            double s = 0.0;
            for (std::size_t j = 0; j < k; ++j) s += a[j] * b[j * p + c];
            out[c] = s;
          }
        }
        vals[i] = std::move(out);
        break;
      }
      case Op::add:
      case Op::sub:
      case Op::mul:
      case Op::emax: {
        const Tensor& a = vals[n.args[0]];
        const Tensor& b = vals[n.args[1]];
        Tensor out(n.shape);
        for (std::size_t j = 0; j < out.size(); ++j) {
          switch (n.op) {
            case Op::add: out[j] = a[j] + b[j]; break;
            case Op::sub: out[j] = a[j] - b[j]; break;
            case Op::mul: out[j] = a[j] * b[j]; break;
            default: out[j] = a[j] >= b[j] ? a[j] : b[j]; break;
          }
        }
        vals[i] = std::move(out);
        break;
      }
      case Op::scale: {
        Tensor out = vals[n.args[0]];
        scale_inplace(out, n.c);
        vals[i] = std::move(out);
        break;
      }
      case Op::exp: {
        Tensor out = vals[n.args[0]];
        for (double& v : out.data) v = std::exp(v);
        vals[i] = std::move(out);
        break;
      }
      case Op::log: {
        Tensor out = vals[n.args[0]];
        for (double& v : out.data) v = std::log(v);
        vals[i] = std::move(out);
        break;
      }
      case Op::softplus: {
        Tensor out = vals[n.args[0]];
        for (double& v : out.data) v = v > 0.0 ? v + std::log1p(std::exp(-v)) : std::log1p(std::exp(v));
        vals[i] = std::move(out);
        break;
      }
      case Op::reshape: {
        Tensor out = vals[n.args[0]];
        out.shape = n.shape;
        vals[i] = std::move(out);
        break;
      }
      case Op::reduce_sum: {
        const Tensor& a = vals[n.args[0]];
        double s = 0.0;
        for (double v : a.data) s += v;
        vals[i] = Tensor::scalar(s);
        break;
      }
      case Op::logsumexp: {
        const Tensor& a = vals[n.args[0]];
        double m = a[0];
        for (double v : a.data) m = std::max(m, v);
        double s = 0.0;
        for (double v : a.data) s += std::exp(v - m);
        vals[i] = Tensor::scalar(m + std::log(s));
        break;
      }
      case Op::conv2d: {
        vals[i] = conv2d_forward(vals[n.args[0]], vals[n.args[1]], vals[n.args[2]], n.pad, n.shape);
        break;
      }
      case Op::avgpool2: {
        const Tensor& a = vals[n.args[0]];
        const std::size_t ch = n.shape[0], oh = n.shape[1], ow = n.shape[2];
        const std::size_t ih = a.shape[1], iw = a.shape[2];
        Tensor out(n.shape);
        for (std::size_t c = 0; c < ch; ++c)
          for (std::size_t y = 0; y < oh; ++y)
            for (std::size_t x = 0; x < ow; ++x) {
              const std::size_t base = c * ih * iw + 2 * y * iw + 2 * x;
              out[(c * oh + y) * ow + x] = 0.25 * (a[base] + a[base + 1] + a[base + iw] + a[base + iw + 1]);
            }
        vals[i] = std::move(out);
        break;
      }
      default: throw ValueError("graph: cannot evaluate leaf " + describe(i));
    }
  }

  static Tensor conv2d_forward(const Tensor& x, const Tensor& w, const Tensor& b, int pad, const Shape& oshape) {
    const std::size_t ci = x.shape[0], ih = x.shape[1], iw = x.shape[2];
    const std::size_t co = w.shape[0], kh = w.shape[2], kw = w.shape[3];
    const std::size_t oh = oshape[1], ow = oshape[2];
    Tensor out(oshape);
    for (std::size_t oc = 0; oc < co; ++oc)
      for (std::size_t y = 0; y < oh; ++y)
        for (std::size_t x0 = 0; x0 < ow; ++x0) {
          double s = b[oc];
          for (std::size_t ic = 0; ic < ci; ++ic)
            for (std::size_t u = 0; u < kh; ++u) {
              const long yy = static_cast<long>(y + u) - pad;
              if (yy < 0 || yy >= static_cast<long>(ih)) continue;
              for (std::size_t v = 0; v < kw; ++v) {
                const long xx = static_cast<long>(x0 + v) - pad;
                if (xx < 0 || xx >= static_cast<long>(iw)) continue;
                s += w[((oc * ci + ic) * kh + u) * kw + v] * x[(ic * ih + yy) * iw + xx];
              }
            }
          out[(oc * oh + y) * ow + x0] = s;
        }
    return out;
  }

  void accum(std::vector<Tensor>& grads, NodeId id, const Tensor& g) const {
    if (grads[id].data.empty()) grads[id] = g;
    else axpy(1.0, g, grads[id]);
  }

  Tensor& grad_slot(std::vector<Tensor>& grads, NodeId id) const {
    if (grads[id].data.empty()) grads[id] = Tensor::zeros(nodes_[id].shape);
    return grads[id];
  }

  void backprop_node(NodeId i, const std::vector<Tensor>& vals, std::vector<Tensor>& grads) const {
    const Node& n = nodes_[i];
    const Tensor& g = grads[i];
    switch (n.op) {
      case Op::input:
      case Op::param: break;
      case Op::matmul: {
        const Tensor& a = vals[n.args[0]];
        const Tensor& b = vals[n.args[1]];
        Tensor& da = grad_slot(grads, n.args[0]);
        Tensor& db = grad_slot(grads, n.args[1]);
        if (a.ndim() == 2 && b.ndim() == 2) {
          const std::size_t m = a.shape[0], k = a.shape[1], p = b.shape[1];
          for (std::size_t r = 0; r < m; ++r)
            for (std::size_t j = 0; j < k; ++j) {
              double s = 0.0;
              for (std::size_t c = 0; c < p; ++c) s += g[r * p + c] * b[j * p + c];
              da[r * k + j] += s;
            }
          for (std::size_t j = 0; j < k; ++j)
            for (std::size_t c = 0; c < p; ++c) {
              double s = 0.0;
              for (std::size_t r = 0; r < m; ++r) s += a[r * k + j] * g[r * p + c];
              db[j * p + c] += s;
            }
        } else if (a.ndim() == 2 && b.ndim() == 1) {
          const std::size_t m = a.shape[0], k = a.shape[1];
          for (std::size_t r = 0; r < m; ++r)
            for (std::size_t j = 0; j < k; ++j) {
              da[r * k + j] += g[r] * b[j];
              db[j] += g[r] * a[r * k + j];
            }
        } else {
          const std::size_t k = a.shape[0], p = b.shape[1];
          for (std::size_t j = 0; j < k; ++j)
            for (std::size_t c = 0; c < p; ++c) {
              da[j] += g[c] * b[j * p + c];
              db[j * p + c] += a[j] * g[c];
            }
        }
        break;
      }
      case Op::add: {
        accum(grads, n.args[0], g);
        accum(grads, n.args[1], g);
        break;
      }
      case Op::sub: {
        accum(grads, n.args[0], g);
        Tensor& db = grad_slot(grads, n.args[1]);
        axpy(-1.0, g, db);
        break;
      }
      case Op::mul: {
        const Tensor& a = vals[n.args[0]];
        const Tensor& b = vals[n.args[1]];
        Tensor& da = grad_slot(grads, n.args[0]);
        Tensor& db = grad_slot(grads, n.args[1]);
        for (std::size_t j = 0; j < g.size(); ++j) {
          da[j] += g[j] * b[j];
          db[j] += g[j] * a[j];
        }
        break;
      }
      case Op::emax: {
        // ties route to the first argument
        const Tensor& a = vals[n.args[0]];
        const Tensor& b = vals[n.args[1]];
        Tensor& da = grad_slot(grads, n.args[0]);
        Tensor& db = grad_slot(grads, n.args[1]);
        for (std::size_t j = 0; j < g.size(); ++j) {
          if (a[j] >= b[j]) da[j] += g[j];
          else db[j] += g[j];
        }
        break;
      }
      case Op::scale: {
        Tensor& da = grad_slot(grads, n.args[0]);
        axpy(n.c, g, da);
        break;
      }
      case Op::exp: {
        Tensor& da = grad_slot(grads, n.args[0]);
        const Tensor& y = vals[i];
        for (std::size_t j = 0; j < g.size(); ++j) da[j] += g[j] * y[j];
        break;
      }
      case Op::log: {
        const Tensor& a = vals[n.args[0]];
        Tensor& da = grad_slot(grads, n.args[0]);
        for (std::size_t j = 0; j < g.size(); ++j) da[j] += g[j] / a[j];
        break;
      }
      case Op::softplus: {
        const Tensor& a = vals[n.args[0]];
        Tensor& da = grad_slot(grads, n.args[0]);
        for (std::size_t j = 0; j < g.size(); ++j) {
          const double s = a[j] > 0.0 ? 1.0 / (1.0 + std::exp(-a[j])) : std::exp(a[j]) / (1.0 + std::exp(a[j]));
          da[j] += g[j] * s;
        }
        break;
      }
      case Op::reshape: {
        Tensor gr = g;
        gr.shape = nodes_[n.args[0]].shape;
        accum(grads, n.args[0], gr);
        break;
      }
      case Op::reduce_sum: {
        Tensor& da = grad_slot(grads, n.args[0]);
        const double gv = g[0];
        for (double& v : da.data) v += gv;
        break;
      }
      case Op::logsumexp: {
        const Tensor& a = vals[n.args[0]];
        Tensor& da = grad_slot(grads, n.args[0]);
        const double lse = vals[i][0];
        const double gv = g[0];
        for (std::size_t j = 0; j < a.size(); ++j) da[j] += gv * std::exp(a[j] - lse);
        break;
      }
      case Op::conv2d: {
        const Tensor& x = vals[n.args[0]];
        const Tensor& w = vals[n.args[1]];
        Tensor& dx = grad_slot(grads, n.args[0]);
        Tensor& dw = grad_slot(grads, n.args[1]);
        Tensor& db = grad_slot(grads, n.args[2]);
        const std::size_t ci = x.shape[0], ih = x.shape[1], iw = x.shape[2];
        const std::size_t co = w.shape[0], kh = w.shape[2], kw = w.shape[3];
        const std::size_t oh = n.shape[1], ow = n.shape[2];
        const int pad = n.pad;
        for (std::size_t oc = 0; oc < co; ++oc)
          for (std::size_t y = 0; y < oh; ++y)
            for (std::size_t x0 = 0; x0 < ow; ++x0) {
              const double gv = g[(oc * oh + y) * ow + x0];
              db[oc] += gv;
              for (std::size_t ic = 0; ic < ci; ++ic)
                for (std::size_t u = 0; u < kh; ++u) {
                  const long yy = static_cast<long>(y + u) - pad;
                  if (yy < 0 || yy >= static_cast<long>(ih)) continue;
                  for (std::size_t v = 0; v < kw; ++v) {
                    const long xx = static_cast<long>(x0 + v) - pad;
                    if (xx < 0 || xx >= static_cast<long>(iw)) continue;
                    dw[((oc * ci + ic) * kh + u) * kw + v] += gv * x[(ic * ih + yy) * iw + xx];
                    dx[(ic * ih + yy) * iw + xx] += gv * w[((oc * ci + ic) * kh + u) * kw + v];
                  }
                }
            }
        break;
      }
      case Op::avgpool2: {
        const Tensor& a = vals[n.args[0]];
        Tensor& da = grad_slot(grads, n.args[0]);
        const std::size_t ch = n.shape[0], oh = n.shape[1], ow = n.shape[2];
        const std::size_t ih = a.shape[1], iw = a.shape[2];
        for (std::size_t c = 0; c < ch; ++c)
          for (std::size_t y = 0; y < oh; ++y)
            for (std::size_t x = 0; x < ow; ++x) {
              const double gv = 0.25 * g[(c * oh + y) * ow + x];
              const std::size_t base = c * ih * iw + 2 * y * iw + 2 * x;
              da[base] += gv;
              da[base + 1] += gv;
              da[base + iw] += gv;
              da[base + iw + 1] += gv;
            }
        break;
      }
    }
  }
};

}  // namespace advebm
