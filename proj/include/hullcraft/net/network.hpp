#pragma once

#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "hullcraft/archive.hpp"
#include "hullcraft/common.hpp"
#include "hullcraft/net/layers.hpp"

namespace hullcraft::net {

// Activations and per-layer scratch for one evaluation. act[0] is the
// input, act[i+1] the output of layer i.
struct Workspace {
  std::vector<Vec> act;
  std::vector<LayerScratch> scratch;
};

// A feed-forward stack built from a JSON architecture description, with
// named taps at layers whose activations are exposed as feature maps.
// Immutable during evaluation; all call state lives in a Workspace.
class Network {
 public:
  Network(ImageShape input, nlohmann::json arch_spec, std::string name = "")
      : input_shape_(input), spec_(std::move(arch_spec)), name_(std::move(name)) {
    build();
  }

  static Network from_archive(const Archive& ar) {
    const auto& m = ar.manifest;
    ImageShape in{m.at("input").at("c").get<int>(), m.at("input").at("h").get<int>(),
                  m.at("input").at("w").get<int>()};
    Network net(in, m.at("arch"), m.value("name", ""));
    net.set_params(ar.get_vec("params"));
    return net;
  }

  Archive to_archive() const {
    Archive ar;
    ar.manifest["format"] = "hullcraft-weights";
    ar.manifest["name"] = name_;
    ar.manifest["input"] = {{"c", input_shape_.channels},
                            {"h", input_shape_.height},
                            {"w", input_shape_.width}};
    ar.manifest["arch"] = spec_;
    Vec p(param_count_);
    get_params(p);
    ar.put("params", p);
    return ar;
  }

  const std::string& name() const { return name_; }
  const nlohmann::json& spec() const { return spec_; }
  const ImageShape& input_shape() const { return input_shape_; }
  int layer_count() const { return static_cast<int>(layers_.size()); }

  int tap_layer(const std::string& tag) const {
    auto it = taps_.find(tag);
    if (it == taps_.end())
      throw ConfigError("network '" + name_ + "': unknown layer tag '" + tag + "'");
    return it->second;
  }

  bool has_tap(const std::string& tag) const { return taps_.count(tag) != 0; }

  // Embedding taps in stack order (every declared tap except "logits").
  const std::vector<std::string>& embedding_taps() const { return embed_taps_; }

  int tap_dim(const std::string& tag) const {
    return shapes_[tap_layer(tag) + 1].size();
  }

  void forward(const Vec& input, Workspace& ws, Rng* rng = nullptr) const {
    require(input.size() == input_shape_.size(),
            "network '" + name_ + "': input size mismatch");
    ws.act.resize(layers_.size() + 1);
    ws.scratch.resize(layers_.size());
    ws.act[0] = input;
    for (std::size_t i = 0; i < layers_.size(); ++i)
      layers_[i]->forward(shapes_[i], ws.act[i], ws.act[i + 1], ws.scratch[i], rng);
  }

  const Vec& tap_output(const Workspace& ws, const std::string& tag) const {
    return ws.act[tap_layer(tag) + 1];
  }

  // Backpropagates gradients seeded at tap outputs. seeds maps layer
  // index -> dL/d(act[idx+1]). grad_input and param_grad, when non-null,
  // are accumulated into (param_grad must be param_count() long).
  void backward(const Workspace& ws, const std::map<int, Vec>& seeds,
                Vec* grad_input, Vec* param_grad) const {
    if (seeds.empty()) return;
    const int top = seeds.rbegin()->first;
    Vec g = Vec::Zero(ws.act[top + 1].size());
    Vec g_in;
    for (int i = top; i >= 0; --i) {
      auto it = seeds.find(i);
      if (it != seeds.end()) g += it->second;
      double* pg = param_grad && layers_[i]->param_count() > 0
                       ? param_grad->data() + param_offset_[i]
                       : nullptr;
      layers_[i]->backward(shapes_[i], ws.act[i], ws.scratch[i], g, g_in, pg);
      g = std::move(g_in);
    }
    if (grad_input) *grad_input += g;
  }

  int param_count() const { return param_count_; }

  void get_params(Vec& out) const {
    out.resize(param_count_);
    for (std::size_t i = 0; i < layers_.size(); ++i)
      layers_[i]->write_params(out.data() + param_offset_[i]);
  }

  void set_params(const Vec& p) {
    require(p.size() == param_count_, "network: parameter vector size mismatch");
    for (std::size_t i = 0; i < layers_.size(); ++i)
      layers_[i]->read_params(p.data() + param_offset_[i]);
  }

  void init_params(Rng& rng) {
    for (auto& l : layers_) l->init_params(rng);
  }

  Layer& layer(int i) { return *layers_[i]; }
  const Layer& layer(int i) const { return *layers_[i]; }

 private:
  void build() {
    require(spec_.contains("layers") && spec_["layers"].is_array(),
            "network spec: missing layers array");
    ImageShape cur = input_shape_;
    shapes_.push_back(cur);
    int offset = 0;
    for (const auto& l : spec_["layers"]) {
      const std::string kind = l.at("kind").get<std::string>();
      std::unique_ptr<Layer> layer;
      if (kind == "conv2d") {
        layer = std::make_unique<Conv2d>(cur.channels, l.at("out").get<int>(),
                                         l.at("k").get<int>(), l.value("pad", 0));
      } else if (kind == "relu") {
        layer = std::make_unique<Relu>();
      } else if (kind == "maxpool") {
        layer = std::make_unique<MaxPool2d>(l.value("win", 2));
      } else if (kind == "dropout") {
        layer = std::make_unique<Dropout>(l.at("rate").get<double>());
      } else if (kind == "flatten") {
        layer = std::make_unique<Flatten>();
      } else if (kind == "dense") {
        layer = std::make_unique<Dense>(cur.size(), l.at("out").get<int>());
      } else {
        throw ConfigError("network spec: unknown layer kind '" + kind + "'");
      }
      cur = layer->output_shape(cur);
      if (l.契约contains("tap")) {}
      if (l.contains("tap")) {
        const std::string tag = l.at("tap").get<std::string>();
        require(taps_.count(tag) == 0, "network spec: duplicate tap '" + tag + "'");
        taps_[tag] = static_cast<int>(layers_.size());
        if (tag != "logits") embed_taps_.push_back(tag);
      }
      param_offset_.push_back(offset);
      offset += layer->param_count();
      layers_.push_back(std::move(layer));
      shapes_.push_back(cur);
    }
    param_count_ = offset;
  }

  ImageShape input_shape_;
  nlohmann::json spec_;
  std::string name_;
  std::vector<std::unique_ptr<Layer>> layers_;
  std::vector<ImageShape> shapes_;
  std::vector<int> param_offset_;
  std::map<std::string, int> taps_;
  std::vector<std::string> embed_taps_;
  int param_count_ = 0;
};

}  // namespace hullcraft::net
