#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "qfl/matrix.hpp"

namespace qfl::data {

// Labeled binary-classification samples. For image-derived datasets,
// meta_h/meta_w keep the original 2-D shape of one feature row.
struct Dataset {
  std::string name;
  Matrix features;
  std::vector<int> labels;  // 0/1 only
  int meta_h = 0;
  int meta_w = 0;

  std::size_t size() const { return labels.size(); }
  void validate() const;
};

struct ClientShard {
  int client_id = 0;
  Dataset train;
  Dataset test;
};

// Two interleaved half circles: outer arc (cos t, sin t) labeled 0, inner
// arc (1 - cos t, 1 - sin t - 1/2) labeled 1, t on a uniform grid over
// [0, pi], i.i.d. Gaussian(0, noise_sigma^2) added per coordinate. Outer
// samples come first; deterministic per seed.
Dataset generate_moons(std::size_t n_samples, double noise_sigma, std::uint64_t seed);

// Raw unsigned-byte tensor as stored in IDX or NPY containers.
struct U8Tensor {
  std::vector<std::size_t> shape;
  std::vector<std::uint8_t> bytes;

  std::size_t count() const { return shape.empty() ? 0 : shape[0]; }
  std::size_t item_size() const;
};

// Big-endian IDX container: magic 0x00000803 (u8 images, 3 dims) or
// 0x00000801 (u8 labels, 1 dim), one 4-byte size per dimension, raw payload.
U8Tensor load_idx(const std::filesystem::path& path);

// Member names of a ZIP archive ("file.npz" listing).
std::vector<std::string> npz_member_names(const std::filesystem::path& path);

// Reads one named NPY v1.0 member (stored or DEFLATE) out of a ZIP archive.
// Supported dtypes: u8 ("|u1"), little-endian f32/f64; C order only.
// Values are widened to double.
struct NpyArray {
  std::vector<std::size_t> shape;
  std::vector<double> values;
};
NpyArray load_npz_array(const std::filesystem::path& path,
                        const std::string& array_name);

// Keeps only the two requested classes out of an image tensor, relabels
// class_a -> 0 and class_b -> 1 preserving order, and scales pixels to
// [0, 1]. images shape must be (count, h, w).
Dataset make_binary_subset(const U8Tensor& images,
                           const std::vector<int>& labels, int class_a,
                           int class_b, const std::string& name);

// Bilinear interpolation on a corner-aligned sampling grid.
std::vector<double> resize_image(const double* img, int in_h, int in_w,
                                 int out_h, int out_w);

// Resizes every row of an image dataset to out_h x out_w.
Dataset resize_dataset(const Dataset& ds, int out_h, int out_w);

// Seeded shuffle followed by a global 80/20 train/test split.
std::pair<Dataset, Dataset> train_test_split(const Dataset& ds, std::uint64_t seed);

// The same shuffle/split as train_test_split, then contiguous equal blocks
// per client (remainder rows go to earlier clients), applied to the train
// and test parts alike.
std::vector<ClientShard> partition_for_clients(const Dataset& ds, int num_clients,
                                               std::uint64_t seed);

// k row indices drawn without replacement, deterministic in (seed, epoch_idx).
std::vector<std::size_t> epoch_sample(const Dataset& ds, std::size_t k,
                                      std::uint64_t seed, std::uint64_t epoch_idx);

// Internal cache container (see docs/cache_format.md for the byte layout).
void save_cache(const Dataset& ds, const std::filesystem::path& path);
Dataset load_cache(const std::filesystem::path& path);

}  // namespace qfl::data
