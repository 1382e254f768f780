#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "hullcraft/common.hpp"

namespace hullcraft {

struct ImageShape {
  int channels = 0;
  int height = 0;
  int width = 0;

  int size() const { return channels * height * width; }
  bool operator==(const ImageShape&) const = default;
};

// An image as a flat (channel-major) array of pixel values in [0,1],
// with its class label and an opaque dataset index.
struct ImageTensor {
  Vec pixels;
  ImageShape shape;
  int label = 0;
  std::int64_t source_id = -1;

  ImageTensor() = default;
  ImageTensor(Vec px, ImageShape s, int lbl, std::int64_t id)
      : pixels(std::move(px)), shape(s), label(lbl), source_id(id) {
    require(pixels.size() == shape.size(), "ImageTensor: pixel count does not match shape");
  }

  double& at(int c, int y, int x) {
    return pixels[(c * shape.height + y) * shape.width + x];
  }
  double at(int c, int y, int x) const {
    return pixels[(c * shape.height + y) * shape.width + x];
  }

  bool pixels_in_unit_box(double slack = 0.0) const {
    return pixels.minCoeff() >= -slack && pixels.maxCoeff() <= 1.0 + slack;
  }
};

struct LabeledDataset {
  std::vector<ImageTensor> items;
  int class_count = 0;

  std::size_t size() const { return items.size(); }
  bool empty() const { return items.empty(); }
};

inline double linf_distance(const ImageTensor& a, const ImageTensor& b) {
  require(a.shape == b.shape, "linf_distance: shape mismatch");
  return (a.pixels - b.pixels).lpNorm<Eigen::Infinity>();
}

}  // namespace hullcraft
