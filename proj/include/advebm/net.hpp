#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "advebm/error.hpp"
#include "advebm/graph.hpp"
#include "advebm/rng.hpp"
#include "advebm/tensor.hpp"

namespace advebm {

enum class ArchTag : std::uint32_t { mlp2d = 0, convtiny = 1 };

inline const char* arch_name(ArchTag a) { return a == ArchTag::mlp2d ? "mlp2d" : "convtiny"; }

inline ArchTag arch_from_name(const std::string& s) {
  if (s == "mlp2d") return ArchTag::mlp2d;
  if (s == "convtiny") return ArchTag::convtiny;
  throw ValueError("unknown architecture '" + s + "'");
}

// convtiny operates on fixed 3x8x8 inputs flattened to D=192.
inline constexpr std::size_t kConvTinyChannels = 3;
inline constexpr std::size_t kConvTinySide = 8;
inline constexpr std::size_t kConvTinyDim = kConvTinyChannels * kConvTinySide * kConvTinySide;

// A classifier f: R^D -> R^K. Graph structure is fixed at build time;
// parameters live in `params` and are bound into the graph per call.
// Immutable during inference; training holds exclusive write access.
//
// Graph outputs: "logits" [K] and "features" (penultimate activation).
struct Classifier {
  Graph graph;
  std::map<std::string, Tensor> params;
  std::size_t input_dim = 0;
  std::size_t num_classes = 0;
  ArchTag arch_tag = ArchTag::mlp2d;

  Tensor logits(const Tensor& x) const {
    auto out = run(x);
    return std::move(out.at("logits"));
  }

  Tensor features(const Tensor& x) const {
    auto out = run(x);
    return std::move(out.at("features"));
  }

  int predict(const Tensor& x) const {
    const Tensor l = logits(x);
    std::size_t best = 0;
    for (std::size_t k = 1; k < l.size(); ++k)
      if (l[k] > l[best]) best = k;
    return static_cast<int>(best);
  }

 private:
  std::map<std::string, Tensor> run(const Tensor& x) const {
    if (x.size() != input_dim)
      throw ShapeError("Classifier::logits", "input has " + std::to_string(x.size()) +
                                                 " entries, expected " + std::to_string(input_dim));
    std::map<std::string, Tensor> bound;
    Tensor flat = x;
    flat.shape = {input_dim};
    bound.emplace("x", std::move(flat));
    for (const auto& [name, t] : params) bound.emplace(name, t);
    return graph.forward(bound);
  }
};

namespace detail {

// PyTorch-style fan-in scaled uniform init: U(-1/sqrt(fan_in), 1/sqrt(fan_in))
inline Tensor init_uniform(Shape shape, std::size_t fan_in, Rng& rng) {
  Tensor t(std::move(shape));
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  for (double& v : t.data) v = rng.uniform(-bound, bound);
  return t;
}

struct MlpLayerSpec {
  std::size_t in, out;
  bool activate;
};

}  // namespace detail

// Builds one of the two fixed architectures with seeded parameter init.
//   mlp2d:    2 -> 64 -> 64 -> K, softplus activations
//   convtiny: [3,8,8] -> conv3x3(8) -> softplus -> avgpool2
//                     -> conv3x3(16) -> softplus -> avgpool2 -> dense(K)
// Softplus keeps input gradients informative everywhere, which the samplers
// rely on.
inline Classifier build(ArchTag arch, std::size_t input_dim, std::size_t num_classes, std::uint64_t init_seed) {
  if (num_classes < 2) throw ValueError("build: num_classes must be >= 2");
  Classifier c;
  c.arch_tag = arch;
  c.input_dim = input_dim;
  c.num_classes = num_classes;
  Rng rng(init_seed);

  if (arch == ArchTag::mlp2d) {
    if (input_dim != 2)
      throw ValueError("build: mlp2d requires input_dim 2, got " + std::to_string(input_dim));
    Graph& g = c.graph;
    Graph::NodeId h = g.input("x", {2});
    const std::vector<detail::MlpLayerSpec> layers = {{2, 64, true}, {64, 64, true}, {64, num_classes, false}};
    for (std::size_t li = 0; li < layers.size(); ++li) {
      const auto& L = layers[li];
      const std::string wname = "fc" + std::to_string(li + 1) + ".w";
      const std::string bname = "fc" + std::to_string(li + 1) + ".b";
      c.params.emplace(wname, detail::init_uniform({L.out, L.in}, L.in, rng));
      c.params.emplace(bname, detail::init_uniform({L.out}, L.in, rng));
      Graph::NodeId w = g.param(wname, {L.out, L.in});
      Graph::NodeId b = g.param(bname, {L.out});
      h = g.add(g.matmul(w, h), b, "fc" + std::to_string(li + 1));
      if (L.activate) h = g.softplus(h, "act" + std::to_string(li + 1));
      if (li + 2 == layers.size()) g.mark_output("features", h);
    }
    g.mark_output("logits", h);
    return c;
  }

  // convtiny
  if (input_dim != kConvTinyDim)
    throw ValueError("build: convtiny requires input_dim " + std::to_string(kConvTinyDim) + " (3x8x8), got " +
                     std::to_string(input_dim));
  Graph& g = c.graph;
  Graph::NodeId x = g.input("x", {kConvTinyDim});
  Graph::NodeId img = g.reshape(x, {kConvTinyChannels, kConvTinySide, kConvTinySide});

  auto conv_block = [&](Graph::NodeId in, std::size_t ci, std::size_t co, int index) {
    const std::string wname = "conv" + std::to_string(index) + ".w";
    const std::string bname = "conv" + std::to_string(index) + ".b";
    const std::size_t fan_in = ci * 3 * 3;
    c.params.emplace(wname, detail::init_uniform({co, ci, 3, 3}, fan_in, rng));
    c.params.emplace(bname, detail::init_uniform({co}, fan_in, rng));
    Graph::NodeId w = g.param(wname, {co, ci, 3, 3});
    Graph::NodeId b = g.param(bname, {co});
    Graph::NodeId h = g.conv2d(in, w, b, 1, "conv" + std::to_string(index));
    h = g.softplus(h, "convact" + std::to_string(index));
    return g.avgpool2(h, "pool" + std::to_string(index));
  };

  Graph::NodeId h = conv_block(img, 3, 8, 1);   // [8,4,4]
  h = conv_block(h, 8, 16, 2);                  // [16,2,2]
  Graph::NodeId flat = g.reshape(h, {64}, "flatten");
  g.mark_output("features", flat);

  c.params.emplace("fc.w", detail::init_uniform({num_classes, 64}, 64, rng));
  c.params.emplace("fc.b", detail::init_uniform({num_classes}, 64, rng));
  Graph::NodeId w = g.param("fc.w", {num_classes, 64});
  Graph::NodeId b = g.param("fc.b", {num_classes});
  g.mark_output("logits", g.add(g.matmul(w, flat), b, "fc"));
  return c;
}

}  // namespace advebm
