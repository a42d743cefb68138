#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace revel {

/// Presence vector over the interpretable features. Bit i = 1 keeps
/// feature i, 0 replaces it with the baseline.
class FeatureMask {
 public:
  /// Throws InvalidArgument if fewer than two features or a bit is not 0/1.
  explicit FeatureMask(std::vector<std::uint8_t> bits);

  static FeatureMask all_ones(std::size_t features);
  static FeatureMask all_zeros(std::size_t features);
  /// Bit i of `code` (least significant first) becomes feature i.
  static FeatureMask from_code(std::uint64_t code, std::size_t features);

  std::size_t size() const { return bits_.size(); }
  bool operator[](std::size_t i) const { return bits_[i] != 0; }
  void set(std::size_t i, bool present) { bits_[i] = present ? 1 : 0; }

  /// Number of present features (|z|).
  std::size_t count() const;
  std::size_t excluded() const { return size() - count(); }
  bool is_all_ones() const { return count() == size(); }

  const std::vector<std::uint8_t>& bits() const { return bits_; }
  std::string to_string() const;

  friend bool operator==(const FeatureMask&, const FeatureMask&) = default;
  friend auto operator<=>(const FeatureMask&, const FeatureMask&) = default;

 private:
  std::vector<std::uint8_t> bits_;
};

struct FeatureMaskHash {
  std::size_t operator()(const FeatureMask& m) const noexcept;
};

/// Dense real tensor. Images use shape {height, width, channels} with
/// row-major (row, column, channel) storage; vectors use shape {n}.
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> values;

  Tensor() = default;
  Tensor(std::vector<std::size_t> shape, std::vector<double> values);

  static Tensor vector(std::vector<double> values);
  static Tensor image(std::size_t height, std::size_t width, std::size_t channels, double fill);

  std::size_t element_count() const { return values.size(); }
  bool is_image() const { return shape.size() == 3; }

  friend bool operator==(const Tensor&, const Tensor&) = default;
};

/// Square grid of patches over an image. Feature i covers patch row
/// i / per_side and patch column i % per_side.
struct PatchGrid {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t channels = 0;
  std::size_t per_side = 0;
  std::size_t patch_height = 0;
  std::size_t patch_width = 0;

  std::size_t feature_count() const { return per_side * per_side; }
  /// Feature index owning pixel (row, col).
  std::size_t feature_at(std::size_t row, std::size_t col) const {
    return (row / patch_height) * per_side + col / patch_width;
  }
};

/// Per-channel fill value for occluded patches.
struct OcclusionBaseline {
  std::vector<double> fill;

  static OcclusionBaseline gray(std::size_t channels) { return {std::vector<double>(channels, 0.5)}; }
};

PatchGrid grid_partition(std::size_t height, std::size_t width, std::size_t channels,
                         std::size_t per_side);

/// Copy of `image` with every patch whose bit is 0 filled by the baseline.
Tensor apply_mask(const Tensor& image, const PatchGrid& grid, const FeatureMask& mask,
                  const OcclusionBaseline& baseline);

/// Entry i is x_i when bit i is set, baseline_i otherwise.
std::vector<double> vector_apply_mask(std::span<const double> x, const FeatureMask& mask,
                                      std::span<const double> baseline);

/// Maps feature masks of one instance to black-box inputs.
class Featurizer {
 public:
  virtual ~Featurizer() = default;
  virtual std::size_t feature_count() const = 0;
  virtual Tensor apply(const Tensor& instance, const FeatureMask& mask) const = 0;
  virtual std::string describe() const = 0;
};

class PatchFeaturizer final : public Featurizer {
 public:
  PatchFeaturizer(PatchGrid grid, OcclusionBaseline baseline);

  std::size_t feature_count() const override { return grid_.feature_count(); }
  Tensor apply(const Tensor& instance, const FeatureMask& mask) const override;
  std::string describe() const override;

  const PatchGrid& grid() const { return grid_; }

 private:
  PatchGrid grid_;
  OcclusionBaseline baseline_;
};

class VectorFeaturizer final : public Featurizer {
 public:
  explicit VectorFeaturizer(std::vector<double> baseline);

  std::size_t feature_count() const override { return baseline_.size(); }
  Tensor apply(const Tensor& instance, const FeatureMask& mask) const override;
  std::string describe() const override;

 private:
  std::vector<double> baseline_;
};

// Raw tensor files: the header line "RT1 <height> <width> <channels>\n"
// followed by height*width*channels little-endian float32 values in
// (row, column, channel) order.

Tensor read_raw_tensor(std::istream& in);
Tensor read_raw_tensor(const std::filesystem::path& path);
void write_raw_tensor(std::ostream& out, const Tensor& image);
void write_raw_tensor(const std::filesystem::path& path, const Tensor& image);

/// Converts 8-bit pixel values to reals in [0,1].
Tensor image_from_u8(std::size_t height, std::size_t width, std::size_t channels,
                     std::span<const std::uint8_t> pixels);

}  // namespace revel
