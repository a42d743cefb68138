#include "revel/featurize.hpp"

#include <filesystem>
#include <sstream>

#include <gtest/gtest.h>

#include "revel/errors.hpp"
#include "revel/rng.hpp"

namespace revel {
namespace {

Tensor random_image(std::size_t h, std::size_t w, std::size_t c, RngStream& rng) {
  Tensor t = Tensor::image(h, w, c, 0.0);
  for (double& v : t.values) v = rng.uniform01();
  return t;
}

TEST(FeatureMask, FromCodeIsLeastSignificantFirst) {
  const FeatureMask m = FeatureMask::from_code(0b0110, 4);
  EXPECT_FALSE(m[0]);
  EXPECT_TRUE(m[1]);
  EXPECT_TRUE(m[2]);
  EXPECT_FALSE(m[3]);
  EXPECT_EQ(m.count(), 2u);
  EXPECT_EQ(m.excluded(), 2u);
  EXPECT_EQ(m.to_string(), "0110");
}

TEST(FeatureMask, RejectsBadInput) {
  EXPECT_THROW(FeatureMask({1}), InvalidArgument);
  EXPECT_THROW(FeatureMask({1, 2}), InvalidArgument);
}

TEST(FeatureMask, HashAndEquality) {
  FeatureMaskHash h;
  EXPECT_EQ(h(FeatureMask::from_code(5, 8)), h(FeatureMask::from_code(5, 8)));
  EXPECT_NE(FeatureMask::from_code(5, 8), FeatureMask::from_code(6, 8));
  EXPECT_TRUE(FeatureMask::all_ones(3).is_all_ones());
}

TEST(GridPartition, PatchSizes) {
  const PatchGrid g4 = grid_partition(224, 224, 3, 4);
  EXPECT_EQ(g4.feature_count(), 16u);
  EXPECT_EQ(g4.patch_height, 56u);
  EXPECT_EQ(g4.patch_width, 56u);
  const PatchGrid g8 = grid_partition(224, 224, 3, 8);
  EXPECT_EQ(g8.feature_count(), 64u);
  EXPECT_EQ(g8.patch_height, 28u);
  EXPECT_THROW(grid_partition(224, 224, 3, 5), InvalidArgument);
  EXPECT_THROW(grid_partition(32, 32, 3, 1), InvalidArgument);
}

TEST(ApplyMask, AllOnesIsIdentity) {
  RngStream rng(1, 1);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t side = 2 + rng.uniform_index(4);
    const std::size_t h = side * (1 + rng.uniform_index(5));
    const std::size_t c = 1 + rng.uniform_index(3);
    const Tensor img = random_image(h, h, c, rng);
    const PatchGrid g = grid_partition(h, h, c, side);
    EXPECT_EQ(apply_mask(img, g, FeatureMask::all_ones(g.feature_count()), OcclusionBaseline::gray(c)), img);
  }
}

TEST(ApplyMask, AllZerosIsGray) {
  RngStream rng(1, 2);
  const Tensor img = random_image(32, 32, 3, rng);
  const PatchGrid g = grid_partition(32, 32, 3, 4);
  const Tensor out = apply_mask(img, g, FeatureMask::all_zeros(16), OcclusionBaseline::gray(3));
  for (double v : out.values) EXPECT_EQ(v, 0.5);
}

TEST(ApplyMask, SingleBitChangesExactlyItsPatch) {
  RngStream rng(1, 3);
  const Tensor img = random_image(224, 224, 3, rng);
  const PatchGrid g = grid_partition(224, 224, 3, 4);
  FeatureMask m = FeatureMask::all_ones(16);
  m.set(0, false);
  const Tensor out = apply_mask(img, g, m, OcclusionBaseline::gray(3));
  std::size_t changed = 0;
  for (std::size_t r = 0; r < 224; ++r) {
    for (std::size_t c = 0; c < 224; ++c) {
      for (std::size_t ch = 0; ch < 3; ++ch) {
        const std::size_t k = (r * 224 + c) * 3 + ch;
        if (out.values[k] != img.values[k]) {
          ++changed;
          EXPECT_LT(r, 56u);
          EXPECT_LT(c, 56u);
        }
      }
    }
  }
  EXPECT_EQ(changed, 56u * 56u * 3u);
}

TEST(ApplyMask, LocalityAndIdempotenceOnRandomMasks) {
  RngStream rng(1, 4);
  const PatchGrid g = grid_partition(24, 24, 2, 6);
  const OcclusionBaseline base{{0.25, 0.75}};
  for (int trial = 0; trial < 50; ++trial) {
    const Tensor img = random_image(24, 24, 2, rng);
    const FeatureMask m = FeatureMask::from_code(rng.next_u64() & ((1ULL << 36) - 1), 36);
    const Tensor once = apply_mask(img, g, m, base);
    EXPECT_EQ(apply_mask(once, g, m, base), once);

    FeatureMask flipped = m;
    const std::size_t bit = rng.uniform_index(36);
    flipped.set(bit, !m[bit]);
    const Tensor other = apply_mask(img, g, flipped, base);
    for (std::size_t r = 0; r < 24; ++r) {
      for (std::size_t c = 0; c < 24; ++c) {
        for (std::size_t ch = 0; ch < 2; ++ch) {
          const std::size_t k = (r * 24 + c) * 2 + ch;
          if (g.feature_at(r, c) != bit) EXPECT_EQ(once.values[k], other.values[k]);
        }
      }
    }
  }
}

TEST(ApplyMask, ShapeMismatchThrows) {
  const Tensor img = Tensor::image(8, 8, 3, 0.1);
  const PatchGrid g = grid_partition(8, 8, 3, 2);
  EXPECT_THROW(apply_mask(img, g, FeatureMask::all_ones(3), OcclusionBaseline::gray(3)), ShapeError);
  EXPECT_THROW(apply_mask(img, g, FeatureMask::all_ones(4), OcclusionBaseline::gray(1)), ShapeError);
}

TEST(VectorApplyMask, Substitutes) {
  const std::vector<double> x{1, 2, 3}, base{0, 0, 0};
  EXPECT_EQ(vector_apply_mask(x, FeatureMask({1, 0, 1}), base), (std::vector<double>{1, 0, 3}));
  EXPECT_EQ(vector_apply_mask(x, FeatureMask::all_ones(3), base), x);
  EXPECT_EQ(vector_apply_mask(x, FeatureMask::all_zeros(3), base), base);
}

TEST(Featurizers, ApplyThroughInterface) {
  const VectorFeaturizer vf({0.0, 0.0, 0.0});
  EXPECT_EQ(vf.feature_count(), 3u);
  EXPECT_EQ(vf.apply(Tensor::vector({1, 2, 3}), FeatureMask({0, 1, 1})).values, (std::vector<double>{0, 2, 3}));
  EXPECT_THROW(vf.apply(Tensor::vector({1, 2}), FeatureMask({0, 1, 1})), ShapeError);

  const PatchFeaturizer pf(grid_partition(4, 4, 1, 2), OcclusionBaseline::gray(1));
  EXPECT_EQ(pf.feature_count(), 4u);
  const Tensor out = pf.apply(Tensor::image(4, 4, 1, 1.0), FeatureMask({1, 1, 1, 0}));
  EXPECT_EQ(out.values[0], 1.0);
  EXPECT_EQ(out.values[15], 0.5);
}

TEST(RawTensor, RoundTripsFloat32Values) {
  RngStream rng(2, 1);
  Tensor img = random_image(5, 7, 3, rng);
  for (double& v : img.values) v = static_cast<float>(v);
  std::stringstream buf;
  write_raw_tensor(buf, img);
  const std::string bytes = buf.str();
  EXPECT_EQ(bytes.substr(0, 10), "RT1 5 7 3\n");
  EXPECT_EQ(bytes.size(), 10u + 5 * 7 * 3 * 4);
  EXPECT_EQ(read_raw_tensor(buf), img);
}

TEST(RawTensor, LittleEndianLayout) {
  std::stringstream buf;
  write_raw_tensor(buf, Tensor::image(1, 1, 1, 1.0));
  const std::string bytes = buf.str();
  // 1.0f = 0x3f800000
  EXPECT_EQ(bytes.substr(bytes.size() - 4), std::string("\x00\x00\x80\x3f", 4));
}

TEST(RawTensor, RejectsBadFiles) {
  std::stringstream bad_header("RT2 1 1 1\n");
  EXPECT_THROW(read_raw_tensor(bad_header), InvalidArgument);
  std::stringstream truncated(std::string("RT1 2 2 1\n") + std::string(8, '\0'));
  EXPECT_THROW(read_raw_tensor(truncated), InvalidArgument);
  EXPECT_THROW(read_raw_tensor(std::filesystem::path("/nonexistent/x.rt")), InvalidArgument);
}

TEST(RawTensor, VectorsRoundTrip) {
  std::stringstream buf;
  write_raw_tensor(buf, Tensor::vector({0.5, 1.5, 2.0}));
  const Tensor back = read_raw_tensor(buf);
  EXPECT_EQ(back.values, (std::vector<double>{0.5, 1.5, 2.0}));
}

TEST(ImageFromU8, Scales) {
  const std::vector<std::uint8_t> px{0, 255, 51, 102};
  const Tensor t = image_from_u8(2, 2, 1, px);
  EXPECT_EQ(t.values[0], 0.0);
  EXPECT_EQ(t.values[1], 1.0);
  EXPECT_DOUBLE_EQ(t.values[2], 0.2);
  EXPECT_THROW(image_from_u8(2, 2, 2, px), ShapeError);
}

}  // namespace
}  // namespace revel
