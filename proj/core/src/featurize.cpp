#include "revel/featurize.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "revel/errors.hpp"

namespace revel {

FeatureMask::FeatureMask(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {
  if (bits_.size() < 2) throw InvalidArgument("feature mask needs at least two features");
  for (std::uint8_t b : bits_) {
    if (b > 1) throw InvalidArgument("feature mask entries must be 0 or 1");
  }
}

FeatureMask FeatureMask::all_ones(std::size_t features) {
  return FeatureMask(std::vector<std::uint8_t>(features, 1));
}

FeatureMask FeatureMask::all_zeros(std::size_t features) {
  return FeatureMask(std::vector<std::uint8_t>(features, 0));
}

FeatureMask FeatureMask::from_code(std::uint64_t code, std::size_t features) {
  std::vector<std::uint8_t> bits(features, 0);
  for (std::size_t i = 0; i < features && i < 64; ++i) bits[i] = (code >> i) & 1U;
  return FeatureMask(std::move(bits));
}

std::size_t FeatureMask::count() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

std::string FeatureMask::to_string() const {
  std::string s(bits_.size(), '0');
  for (std::size_t i = 0; i < bits_.size(); ++i) s[i] = bits_[i] ? '1' : '0';
  return s;
}

std::size_t FeatureMaskHash::operator()(const FeatureMask& m) const noexcept {
  // FNV-1a over the bits.
  std::uint64_t h = 1469598103934665603ULL;
  for (std::uint8_t b : m.bits()) {
    h ^= b;
    h *= 1099511628211ULL;
  }
  h ^= m.size();
  return static_cast<std::size_t>(h);
}

Tensor::Tensor(std::vector<std::size_t> shape_in, std::vector<double> values_in)
    : shape(std::move(shape_in)), values(std::move(values_in)) {
  std::size_t n = shape.empty() ? 0 : 1;
  for (std::size_t d : shape) n *= d;
  if (n != values.size()) {
    throw ShapeError("tensor shape holds " + std::to_string(n) + " values, got " +
                     std::to_string(values.size()));
  }
}

Tensor Tensor::vector(std::vector<double> values) {
  const std::size_t n = values.size();
  return Tensor({n}, std::move(values));
}

Tensor Tensor::image(std::size_t height, std::size_t width, std::size_t channels, double fill) {
  return Tensor({height, width, channels}, std::vector<double>(height * width * channels, fill));
}

PatchGrid grid_partition(std::size_t height, std::size_t width, std::size_t channels,
                         std::size_t per_side) {
  if (per_side < 2) throw InvalidArgument("patch grid needs at least 2 patches per side");
  if (channels == 0) throw InvalidArgument("image needs at least one channel");
  if (height == 0 || width == 0 || height % per_side != 0 || width % per_side != 0) {
    throw InvalidArgument("image of " + std::to_string(height) + "x" + std::to_string(width) +
                          " is not divisible into " + std::to_string(per_side) + "x" +
                          std::to_string(per_side) + " patches");
  }
  return PatchGrid{height, width, channels, per_side, height / per_side, width / per_side};
}

namespace {

void check_image(const Tensor& image, const PatchGrid& grid) {
  if (!image.is_image() || image.shape[0] != grid.height || image.shape[1] != grid.width ||
      image.shape[2] != grid.channels) {
    throw ShapeError("image shape does not match the patch grid");
  }
}

}  // namespace

Tensor apply_mask(const Tensor& image, const PatchGrid& grid, const FeatureMask& mask,
                  const OcclusionBaseline& baseline) {
  check_image(image, grid);
  if (mask.size() != grid.feature_count()) {
    throw ShapeError("mask has " + std::to_string(mask.size()) + " features, grid has " +
                     std::to_string(grid.feature_count()));
  }
  if (baseline.fill.size() != grid.channels) {
    throw ShapeError("baseline has " + std::to_string(baseline.fill.size()) +
                     " channels, image has " + std::to_string(grid.channels));
  }
  Tensor out = image;
  const std::size_t c = grid.channels;
  for (std::size_t f = 0; f < mask.size(); ++f) {
    if (mask[f]) continue;
    const std::size_t r0 = (f / grid.per_side) * grid.patch_height;
    const std::size_t c0 = (f % grid.per_side) * grid.patch_width;
    for (std::size_t r = r0; r < r0 + grid.patch_height; ++r) {
      double* row = out.values.data() + (r * grid.width + c0) * c;
      for (std::size_t col = 0; col < grid.patch_width; ++col) {
        std::copy(baseline.fill.begin(), baseline.fill.end(), row + col * c);
      }
    }
  }
  return out;
}

std::vector<double> vector_apply_mask(std::span<const double> x, const FeatureMask& mask,
                                      std::span<const double> baseline) {
  if (x.size() != mask.size() || baseline.size() != mask.size()) {
    throw ShapeError("vector, mask and baseline lengths differ");
  }
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = mask[i] ? x[i] : baseline[i];
  return out;
}

PatchFeaturizer::PatchFeaturizer(PatchGrid grid, OcclusionBaseline baseline)
    : grid_(grid), baseline_(std::move(baseline)) {
  if (baseline_.fill.size() != grid_.channels) {
    throw ShapeError("baseline channel count does not match the grid");
  }
  for (double v : baseline_.fill) {
    if (!(v >= 0.0 && v <= 1.0)) throw InvalidArgument("baseline value outside [0,1]");
  }
}

Tensor PatchFeaturizer::apply(const Tensor& instance, const FeatureMask& mask) const {
  return apply_mask(instance, grid_, mask, baseline_);
}

std::string PatchFeaturizer::describe() const {
  std::ostringstream s;
  s << "grid " << grid_.per_side << "x" << grid_.per_side << " over " << grid_.height << "x"
    << grid_.width << "x" << grid_.channels;
  return s.str();
}

VectorFeaturizer::VectorFeaturizer(std::vector<double> baseline) : baseline_(std::move(baseline)) {
  if (baseline_.size() < 2) throw InvalidArgument("vector featurizer needs at least two features");
}

Tensor VectorFeaturizer::apply(const Tensor& instance, const FeatureMask& mask) const {
  if (instance.values.size() != baseline_.size()) {
    throw ShapeError("instance has " + std::to_string(instance.values.size()) +
                     " values, featurizer expects " + std::to_string(baseline_.size()));
  }
  return Tensor(instance.shape, vector_apply_mask(instance.values, mask, baseline_));
}

std::string VectorFeaturizer::describe() const {
  return "vector of " + std::to_string(baseline_.size());
}

Tensor read_raw_tensor(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) throw InvalidArgument("raw tensor: missing header");
  std::istringstream hs(header);
  std::string magic;
  long long h = 0, w = 0, c = 0;
  if (!(hs >> magic >> h >> w >> c) || magic != "RT1" || h <= 0 || w <= 0 || c <= 0) {
    throw InvalidArgument("raw tensor: bad header '" + header + "'");
  }
  const std::size_t n = static_cast<std::size_t>(h * w * c);
  std::vector<unsigned char> bytes(n * 4);
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (static_cast<std::size_t>(in.gcount()) != bytes.size()) {
    throw InvalidArgument("raw tensor: truncated payload");
  }
  std::vector<double> values(n);
  for (std::size_t i = 0; i < n; ++i) {
    const unsigned char* b = bytes.data() + 4 * i;
    const std::uint32_t u = std::uint32_t{b[0]} | (std::uint32_t{b[1]} << 8) |
                            (std::uint32_t{b[2]} << 16) | (std::uint32_t{b[3]} << 24);
    values[i] = static_cast<double>(std::bit_cast<float>(u));
  }
  return Tensor({static_cast<std::size_t>(h), static_cast<std::size_t>(w),
                 static_cast<std::size_t>(c)},
                std::move(values));
}

Tensor read_raw_tensor(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open raw tensor file " + path.string());
  return read_raw_tensor(in);
}

void write_raw_tensor(std::ostream& out, const Tensor& image) {
  std::size_t h = 1, w = 1, c = 1;
  if (image.is_image()) {
    h = image.shape[0];
    w = image.shape[1];
    c = image.shape[2];
  } else if (image.shape.size() == 1) {
    w = image.shape[0];
  } else {
    throw ShapeError("raw tensor files hold rank-1 or rank-3 tensors");
  }
  out << "RT1 " << h << ' ' << w << ' ' << c << '\n';
  std::vector<unsigned char> bytes(image.values.size() * 4);
  for (std::size_t i = 0; i < image.values.size(); ++i) {
    const auto u = std::bit_cast<std::uint32_t>(static_cast<float>(image.values[i]));
    for (int k = 0; k < 4; ++k) bytes[4 * i + k] = static_cast<unsigned char>(u >> (8 * k));
  }
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

void write_raw_tensor(const std::filesystem::path& path, const Tensor& image) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot write raw tensor file " + path.string());
  write_raw_tensor(out, image);
}

Tensor image_from_u8(std::size_t height, std::size_t width, std::size_t channels,
                     std::span<const std::uint8_t> pixels) {
  if (pixels.size() != height * width * channels) throw ShapeError("pixel count mismatch");
  std::vector<double> values(pixels.size());
  std::transform(pixels.begin(), pixels.end(), values.begin(),
                 [](std::uint8_t p) { return static_cast<double>(p) / 255.0; });
  return Tensor({height, width, channels}, std::move(values));
}

}  // namespace revel
