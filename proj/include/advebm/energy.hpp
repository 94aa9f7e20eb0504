#pragma once

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "advebm/error.hpp"
#include "advebm/graph.hpp"
#include "advebm/net.hpp"
#include "advebm/tensor.hpp"

namespace advebm {

// Energy reading of a classifier: the y-th logit negated is the joint energy
// E(x,y), the negated logsumexp of the logits is the marginal energy E(x).
// Stateless over an immutable classifier; all calls are concurrency-safe and
// own their workspace.
//
// The classifier graph is extended once, at construction, with scalar energy
// heads so that every quantity (and its gradient w.r.t. x or parameters)
// comes out of the same reverse-mode machinery:
//   lse   = logsumexp(logits)           pick = sum(onehot * logits)
//   E(x)  = -lse                        E(x,y) = -pick
//   CE    = lse - pick
class EnergyView {
 public:
  explicit EnergyView(const Classifier& c) : clf_(&c), graph_(c.graph) {
    Graph::NodeId logits = graph_.output_id("logits");
    Graph::NodeId onehot = graph_.input("onehot", {c.num_classes});
    Graph::NodeId lse = graph_.logsumexp(logits, "lse");
    Graph::NodeId pick = graph_.reduce_sum(graph_.mul(onehot, logits), "pick");
    graph_.mark_output("marginal_energy", graph_.scale(lse, -1.0, "marginal_energy"));
    graph_.mark_output("joint_energy", graph_.scale(pick, -1.0, "joint_energy"));
    graph_.mark_output("cross_entropy", graph_.sub(lse, pick, "cross_entropy"));
    x_node_ = graph_.inputs().at("x");
    onehot_node_ = onehot;
    for (const auto& [name, id] : graph_.params()) param_nodes_.emplace_back(name, id);
    logits_node_ = logits;
    lse_node_ = lse;
    joint_node_ = graph_.output_id("joint_energy");
    marginal_node_ = graph_.output_id("marginal_energy");
    ce_node_ = graph_.output_id("cross_entropy");
  }

  const Classifier& classifier() const { return *clf_; }
  std::size_t num_classes() const { return clf_->num_classes; }
  std::size_t input_dim() const { return clf_->input_dim; }

  // E(x, y) = -logits(x)[y]
  double joint_energy(const Tensor& x, int y) const {
    Eval ev;
    run_forward(x, y, ev);
    return ev.vals[joint_node_].item();
  }

  // E(x) = -logsumexp_y logits(x)[y]
  double marginal_energy(const Tensor& x) const {
    Eval ev;
    run_forward(x, -1, ev);
    return ev.vals[marginal_node_].item();
  }

  // softmax of the logits; entries positive, sum 1
  Tensor posterior(const Tensor& x) const {
    Eval ev;
    run_forward(x, -1, ev);
    const Tensor& logits = ev.vals[logits_node_];
    const double lse = ev.vals[lse_node_].item();
    Tensor p({logits.size()});
    for (std::size_t k = 0; k < p.size(); ++k) p[k] = std::exp(logits[k] - lse);
    return p;
  }

  // -log p(y|x) = E(x,y) - E(x)
  double cross_entropy(const Tensor& x, int y) const {
    Eval ev;
    run_forward(x, y, ev);
    return ev.vals[ce_node_].item();
  }

  Tensor logits(const Tensor& x) const {
    Eval ev;
    run_forward(x, -1, ev);
    return ev.vals[logits_node_];
  }

  // ---- gradients w.r.t. the input ----

  double joint_energy_grad_x(const Tensor& x, int y, Tensor& grad_x) const {
    return grad_x_of(joint_node_, x, y, grad_x);
  }

  double marginal_energy_grad_x(const Tensor& x, Tensor& grad_x) const {
    return grad_x_of(marginal_node_, x, -1, grad_x);
  }

  double cross_entropy_grad_x(const Tensor& x, int y, Tensor& grad_x) const {
    return grad_x_of(ce_node_, x, y, grad_x);
  }

  // ---- gradients w.r.t. the parameters (training side) ----

  struct LossGrads {
    double value = 0.0;
    std::map<std::string, Tensor> dparams;
  };

  LossGrads cross_entropy_grad_params(const Tensor& x, int y) const {
    return grad_params_of(ce_node_, x, y);
  }

  LossGrads marginal_energy_grad_params(const Tensor& x) const {
    return grad_params_of(marginal_node_, x, -1);
  }

 private:
  struct Eval {
    std::vector<const Tensor*> leaf;
    std::vector<Tensor> vals;
    Tensor x_flat, onehot;
  };

  const Classifier* clf_;
  Graph graph_;
  Graph::NodeId x_node_, onehot_node_, logits_node_, lse_node_, joint_node_, marginal_node_, ce_node_;
  std::vector<std::pair<std::string, Graph::NodeId>> param_nodes_;

  // y < 0 binds an all-zero onehot (the joint/CE heads are then unused)
  void run_forward(const Tensor& x, int y, Eval& ev) const {
    const std::size_t k = clf_->num_classes;
    if (y >= 0 && static_cast<std::size_t>(y) >= k)
      throw ValueError("energy: class index " + std::to_string(y) + " out of range [0," + std::to_string(k) + ")");
    if (x.size() != clf_->input_dim)
      throw ShapeError("energy", "input has " + std::to_string(x.size()) + " entries, expected " +
                                     std::to_string(clf_->input_dim));
    ev.x_flat = x;
    ev.x_flat.shape = {clf_->input_dim};
    ev.onehot = Tensor::zeros({k});
    if (y >= 0) ev.onehot[static_cast<std::size_t>(y)] = 1.0;
    ev.leaf.assign(graph_.node_count(), nullptr);
    ev.leaf[x_node_] = &ev.x_flat;
    ev.leaf[onehot_node_] = &ev.onehot;
    for (const auto& [name, id] : param_nodes_) ev.leaf[id] = &clf_->params.at(name);
    graph_.eval(ev.leaf, ev.vals);
  }

  double grad_x_of(Graph::NodeId seed, const Tensor& x, int y, Tensor& grad_x) const {
    Eval ev;
    run_forward(x, y, ev);
    std::vector<Tensor> grads;
    graph_.eval_backward(seed, ev.vals, grads);
    grad_x = grads[x_node_].data.empty() ? Tensor::zeros({clf_->input_dim}) : std::move(grads[x_node_]);
    grad_x.shape = x.shape;
    return ev.vals[seed].item();
  }

  LossGrads grad_params_of(Graph::NodeId seed, const Tensor& x, int y) const {
    Eval ev;
    run_forward(x, y, ev);
    std::vector<Tensor> grads;
    graph_.eval_backward(seed, ev.vals, grads);
    LossGrads out;
    out.value = ev.vals[seed].item();
    for (const auto& [name, id] : param_nodes_)
      out.dparams.emplace(name, grads[id].data.empty() ? Tensor::zeros(graph_.shape_of(id)) : std::move(grads[id]));
    return out;
  }
};

}  // namespace advebm
