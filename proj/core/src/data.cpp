#include "qfl/data.hpp"

#include <zlib.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>

#include "qfl/errors.hpp"
#include "qfl/rng.hpp"

namespace qfl::data {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw NotFoundError("cannot open file: " + path.string());
  }
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return bytes;
}

std::uint32_t read_be32(const std::uint8_t* p) {
  return (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) |
         (std::uint32_t{p[2]} << 8) | std::uint32_t{p[3]};
}

std::uint16_t read_le16(const std::uint8_t* p) {
  return static_cast<std::uint16_t>(p[0] | (std::uint16_t{p[1]} << 8));
}

std::uint32_t read_le32(const std::uint8_t* p) {
  return std::uint32_t{p[0]} | (std::uint32_t{p[1]} << 8) |
         (std::uint32_t{p[2]} << 16) | (std::uint32_t{p[3]} << 24);
}

}  // namespace

void Dataset::validate() const {
  if (features.rows != labels.size()) {
    throw ShapeError("dataset '" + name + "': " + std::to_string(features.rows) +
                     " feature rows vs " + std::to_string(labels.size()) +
                     " labels");
  }
  for (int label : labels) {
    if (label != 0 && label != 1) {
      throw UsageError("dataset '" + name + "': labels must be 0/1");
    }
  }
}

std::size_t U8Tensor::item_size() const {
  std::size_t n = 1;
  for (std::size_t i = 1; i < shape.size(); ++i) {
    n *= shape[i];
  }
  return n;
}

Dataset generate_moons(std::size_t n_samples, double noise_sigma, std::uint64_t seed) {
  if (n_samples < 2) {
    throw UsageError("generate_moons: need at least 2 samples");
  }
  const std::size_t n_outer = n_samples / 2;
  const std::size_t n_inner = n_samples - n_outer;

  Dataset ds;
  ds.name = "moons";
  ds.features = Matrix(n_samples, 2);
  ds.labels.assign(n_samples, 0);

  rng::Prng prng(rng::mix(seed, {rng::kMoons}));
  auto grid_t = [](std::size_t i, std::size_t n) {
    return n > 1 ? kPi * static_cast<double>(i) / static_cast<double>(n - 1) : 0.0;
  };
  for (std::size_t i = 0; i < n_outer; ++i) {
    const double t = grid_t(i, n_outer);
    ds.features.at(i, 0) = std::cos(t);
    ds.features.at(i, 1) = std::sin(t);
    ds.labels[i] = 0;
  }
  for (std::size_t i = 0; i < n_inner; ++i) {
    const double t = grid_t(i, n_inner);
    const std::size_t r = n_outer + i;
    ds.features.at(r, 0) = 1.0 - std::cos(t);
    ds.features.at(r, 1) = 1.0 - std::sin(t) - 0.5;
    ds.labels[r] = 1;
  }
  if (noise_sigma > 0.0) {
    for (double& v : ds.features.values) {
      v += noise_sigma * prng.gaussian();
    }
  }
  return ds;
}

U8Tensor load_idx(const std::filesystem::path& path) {
  const std::vector<std::uint8_t> bytes = read_file(path);
  if (bytes.size() < 4) {
    throw FormatError("IDX file too short for magic: " + path.string());
  }
  const std::uint32_t magic = read_be32(bytes.data());
  std::size_t num_dims = 0;
  if (magic == 0x00000803) {
    num_dims = 3;
  } else if (magic == 0x00000801) {
    num_dims = 1;
  } else {
    std::ostringstream msg;
    msg << "bad IDX magic 0x" << std::hex << magic << " in " << path.string()
        << " (expected 0x00000803 or 0x00000801)";
    throw FormatError(msg.str());
  }
  const std::size_t header_size = 4 + 4 * num_dims;
  if (bytes.size() < header_size) {
    throw FormatError("IDX header truncated: " + path.string());
  }
  U8Tensor tensor;
  std::size_t payload = 1;
  for (std::size_t d = 0; d < num_dims; ++d) {
    const std::size_t dim = read_be32(bytes.data() + 4 + 4 * d);
    tensor.shape.push_back(dim);
    payload *= dim;
  }
  const std::size_t actual = bytes.size() - header_size;
  if (actual != payload) {
    throw FormatError("IDX payload truncated in " + path.string() + ": expected " +
                      std::to_string(payload) + " bytes, found " +
                      std::to_string(actual));
  }
  tensor.bytes.assign(bytes.begin() + static_cast<std::ptrdiff_t>(header_size),
                      bytes.end());
  return tensor;
}

namespace {

struct ZipMember {
  std::string name;
  std::uint16_t method = 0;  // 0 = stored, 8 = deflate
  std::uint32_t compressed_size = 0;
  std::uint32_t uncompressed_size = 0;
  std::uint32_t local_header_offset = 0;
};

// Walks the end-of-central-directory record and the central directory.
std::vector<ZipMember> zip_directory(const std::vector<std::uint8_t>& bytes,
                                     const std::string& origin) {
  constexpr std::uint32_t kEocdSig = 0x06054b50;
  constexpr std::uint32_t kCentralSig = 0x02014b50;
  if (bytes.size() < 22) {
    throw FormatError("ZIP file too short: " + origin);
  }
  // EOCD is at the end, possibly preceded by a comment (<= 65535 bytes).
  std::size_t eocd = std::string::npos;
  const std::size_t scan_limit =
      bytes.size() >= 22 + 65535 ? bytes.size() - 22 - 65535 : 0;
  for (std::size_t i = bytes.size() - 22; ; --i) {
    if (read_le32(bytes.data() + i) == kEocdSig) {
      eocd = i;
      break;
    }
    if (i == scan_limit) {
      break;
    }
  }
  if (eocd == std::string::npos) {
    throw FormatError("ZIP end-of-central-directory not found: " + origin);
  }
  const std::uint16_t entry_count = read_le16(bytes.data() + eocd + 10);
  const std::uint32_t cd_offset = read_le32(bytes.data() + eocd + 16);

  std::vector<ZipMember> members;
  std::size_t pos = cd_offset;
  for (std::uint16_t e = 0; e < entry_count; ++e) {
    if (pos + 46 > bytes.size() || read_le32(bytes.data() + pos) != kCentralSig) {
      throw FormatError("ZIP central directory corrupt: " + origin);
    }
    ZipMember m;
    m.method = read_le16(bytes.data() + pos + 10);
    m.compressed_size = read_le32(bytes.data() + pos + 20);
    m.uncompressed_size = read_le32(bytes.data() + pos + 24);
    const std::uint16_t name_len = read_le16(bytes.data() + pos + 28);
    const std::uint16_t extra_len = read_le16(bytes.data() + pos + 30);
    const std::uint16_t comment_len = read_le16(bytes.data() + pos + 32);
    m.local_header_offset = read_le32(bytes.data() + pos + 42);
    if (pos + 46 + name_len > bytes.size()) {
      throw FormatError("ZIP member name truncated: " + origin);
    }
    m.name.assign(reinterpret_cast<const char*>(bytes.data() + pos + 46), name_len);
    members.push_back(std::move(m));
    pos += 46 + name_len + extra_len + comment_len;
  }
  return members;
}

// Extracts the raw (decompressed) bytes of one member.
std::vector<std::uint8_t> zip_extract(const std::vector<std::uint8_t>& bytes,
                                      const ZipMember& m, const std::string& origin) {
  constexpr std::uint32_t kLocalSig = 0x04034b50;
  const std::size_t pos = m.local_header_offset;
  if (pos + 30 > bytes.size() || read_le32(bytes.data() + pos) != kLocalSig) {
    throw FormatError("ZIP local header corrupt for member '" + m.name + "': " +
                      origin);
  }
  const std::uint16_t name_len = read_le16(bytes.data() + pos + 26);
  const std::uint16_t extra_len = read_le16(bytes.data() + pos + 28);
  const std::size_t data_pos = pos + 30 + name_len + extra_len;
  if (data_pos + m.compressed_size > bytes.size()) {
    throw FormatError("ZIP member data truncated for '" + m.name + "': " + origin);
  }
  if (m.method == 0) {
    if (m.compressed_size != m.uncompressed_size) {
      throw FormatError("stored ZIP member with inconsistent sizes: " + m.name);
    }
    return {bytes.begin() + static_cast<std::ptrdiff_t>(data_pos),
            bytes.begin() + static_cast<std::ptrdiff_t>(data_pos + m.compressed_size)};
  }
  if (m.method != 8) {
    throw FormatError("unsupported ZIP compression method " +
                      std::to_string(m.method) + " for member '" + m.name + "'");
  }
  std::vector<std::uint8_t> out(m.uncompressed_size);
  z_stream zs{};
  if (inflateInit2(&zs, -MAX_WBITS) != Z_OK) {  // raw deflate
    throw IoError("zlib inflateInit failed");
  }
  zs.next_in = const_cast<Bytef*>(bytes.data() + data_pos);
  zs.avail_in = m.compressed_size;
  zs.next_out = out.data();
  zs.avail_out = m.uncompressed_size;
  const int rc = inflate(&zs, Z_FINISH);
  inflateEnd(&zs);
  if (rc != Z_STREAM_END || zs.total_out != m.uncompressed_size) {
    throw FormatError("DEFLATE stream corrupt for ZIP member '" + m.name + "': " +
                      origin);
  }
  return out;
}

struct NpyHeader {
  std::string descr;
  bool fortran_order = false;
  std::vector<std::size_t> shape;
};

// Parses the python-literal header dict of an NPY v1.x payload.
NpyHeader parse_npy_header(const std::vector<std::uint8_t>& bytes,
                           const std::string& member, std::size_t& data_offset) {
  static const char kMagic[] = "\x93NUMPY";
  if (bytes.size() < 10 || std::memcmp(bytes.data(), kMagic, 6) != 0) {
    throw FormatError("NPY magic missing in member '" + member + "'");
  }
  const int major = bytes[6];
  if (major != 1) {
    throw FormatError("unsupported NPY version " + std::to_string(major) +
                      " in member '" + member + "'");
  }
  const std::uint16_t header_len = read_le16(bytes.data() + 8);
  if (10 + static_cast<std::size_t>(header_len) > bytes.size()) {
    throw FormatError("NPY header truncated in member '" + member + "'");
  }
  const std::string header(reinterpret_cast<const char*>(bytes.data() + 10),
                           header_len);
  data_offset = 10 + header_len;

  auto find_value = [&](const std::string& key) -> std::string {
    const std::size_t kpos = header.find("'" + key + "'");
    if (kpos == std::string::npos) {
      throw FormatError("NPY header lacks key '" + key + "' in member '" + member +
                        "'");
    }
    std::size_t colon = header.find(':', kpos);
    if (colon == std::string::npos) {
      throw FormatError("NPY header malformed in member '" + member + "'");
    }
    return header.substr(colon + 1);
  };

  NpyHeader parsed;
  {
    std::string rest = find_value("descr");
    const std::size_t q0 = rest.find('\'');
    const std::size_t q1 = rest.find('\'', q0 + 1);
    if (q0 == std::string::npos || q1 == std::string::npos) {
      throw FormatError("NPY descr malformed in member '" + member + "'");
    }
    parsed.descr = rest.substr(q0 + 1, q1 - q0 - 1);
  }
  {
    const std::string rest = find_value("fortran_order");
    const std::size_t t = rest.find_first_not_of(" \t");
    parsed.fortran_order = rest.compare(t, 4, "True") == 0;
  }
  {
    const std::string rest = find_value("shape");
    const std::size_t open = rest.find('(');
    const std::size_t close = rest.find(')', open);
    if (open == std::string::npos || close == std::string::npos) {
      throw FormatError("NPY shape malformed in member '" + member + "'");
    }
    std::string tuple = rest.substr(open + 1, close - open - 1);
    std::stringstream ss(tuple);
    std::string item;
    while (std::getline(ss, item, ',')) {
      const std::size_t begin = item.find_first_not_of(" \t");
      if (begin == std::string::npos) {
        continue;  // trailing comma of 1-tuples
      }
      parsed.shape.push_back(std::stoull(item.substr(begin)));
    }
  }
  return parsed;
}

}  // namespace

std::vector<std::string> npz_member_names(const std::filesystem::path& path) {
  const std::vector<std::uint8_t> bytes = read_file(path);
  std::vector<std::string> names;
  for (const ZipMember& m : zip_directory(bytes, path.string())) {
    std::string n = m.name;
    if (n.size() > 4 && n.ends_with(".npy")) {
      n.resize(n.size() - 4);
    }
    names.push_back(std::move(n));
  }
  return names;
}

NpyArray load_npz_array(const std::filesystem::path& path,
                        const std::string& array_name) {
  const std::vector<std::uint8_t> bytes = read_file(path);
  const std::vector<ZipMember> members = zip_directory(bytes, path.string());
  const ZipMember* found = nullptr;
  for (const ZipMember& m : members) {
    if (m.name == array_name || m.name == array_name + ".npy") {
      found = &m;
      break;
    }
  }
  if (found == nullptr) {
    std::string available;
    for (const ZipMember& m : members) {
      if (!available.empty()) {
        available += ", ";
      }
      available += m.name;
    }
    throw NotFoundError("array '" + array_name + "' not found in " + path.string() +
                        " (available: " + available + ")");
  }
  const std::vector<std::uint8_t> payload = zip_extract(bytes, *found, path.string());
  std::size_t data_offset = 0;
  const NpyHeader header = parse_npy_header(payload, found->name, data_offset);
  if (header.fortran_order) {
    throw UnsupportedLayoutError("Fortran-ordered NPY arrays are unsupported (member '" +
                                 found->name + "')");
  }
  std::size_t element_count = 1;
  for (std::size_t d : header.shape) {
    element_count *= d;
  }

  NpyArray array;
  array.shape = header.shape;
  array.values.resize(element_count);
  const std::uint8_t* data = payload.data() + data_offset;
  const std::size_t data_bytes = payload.size() - data_offset;
  if (header.descr == "|u1" || header.descr == "<u1" || header.descr == "u1") {
    if (data_bytes < element_count) {
      throw FormatError("NPY payload truncated in member '" + found->name + "'");
    }
    for (std::size_t i = 0; i < element_count; ++i) {
      array.values[i] = static_cast<double>(data[i]);
    }
  } else if (header.descr == "<f4") {
    if (data_bytes < element_count * 4) {
      throw FormatError("NPY payload truncated in member '" + found->name + "'");
    }
    for (std::size_t i = 0; i < element_count; ++i) {
      std::uint32_t raw = read_le32(data + 4 * i);
      float f;
      std::memcpy(&f, &raw, sizeof(f));
      array.values[i] = static_cast<double>(f);
    }
  } else if (header.descr == "<f8") {
    if (data_bytes < element_count * 8) {
      throw FormatError("NPY payload truncated in member '" + found->name + "'");
    }
    for (std::size_t i = 0; i < element_count; ++i) {
      std::uint64_t raw = std::uint64_t{read_le32(data + 8 * i)} |
                          (std::uint64_t{read_le32(data + 8 * i + 4)} << 32);
      double d;
      std::memcpy(&d, &raw, sizeof(d));
      array.values[i] = d;
    }
  } else {
    throw FormatError("unsupported NPY dtype '" + header.descr + "' in member '" +
                      found->name + "'");
  }
  return array;
}

Dataset make_binary_subset(const U8Tensor& images, const std::vector<int>& labels,
                           int class_a, int class_b, const std::string& name) {
  if (class_a == class_b) {
    throw UsageError("make_binary_subset: classes must differ");
  }
  if (images.shape.size() != 3) {
    throw ShapeError("make_binary_subset expects a (count, h, w) tensor");
  }
  if (images.count() != labels.size()) {
    throw ShapeError("make_binary_subset: image/label count mismatch");
  }
  const std::size_t pixels = images.item_size();
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == class_a || labels[i] == class_b) {
      keep.push_back(i);
    }
  }
  if (keep.empty()) {
    throw UsageError("make_binary_subset: no samples of classes " +
                     std::to_string(class_a) + "/" + std::to_string(class_b));
  }
  Dataset ds;
  ds.name = name;
  ds.meta_h = static_cast<int>(images.shape[1]);
  ds.meta_w = static_cast<int>(images.shape[2]);
  ds.features = Matrix(keep.size(), pixels);
  ds.labels.resize(keep.size());
  for (std::size_t r = 0; r < keep.size(); ++r) {
    const std::uint8_t* src = images.bytes.data() + keep[r] * pixels;
    for (std::size_t c = 0; c < pixels; ++c) {
      ds.features.at(r, c) = static_cast<double>(src[c]) / 255.0;
    }
    ds.labels[r] = labels[keep[r]] == class_a ? 0 : 1;
  }
  return ds;
}

std::vector<double> resize_image(const double* img, int in_h, int in_w,
                                 int out_h, int out_w) {
  if (in_h < 1 || in_w < 1 || out_h < 1 || out_w < 1) {
    throw ShapeError("resize_image: all dimensions must be >= 1");
  }
  std::vector<double> out(static_cast<std::size_t>(out_h) * out_w);
  const double sy = out_h > 1 ? static_cast<double>(in_h - 1) / (out_h - 1) : 0.0;
  const double sx = out_w > 1 ? static_cast<double>(in_w - 1) / (out_w - 1) : 0.0;
  for (int oy = 0; oy < out_h; ++oy) {
    const double fy = sy * oy;
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, in_h - 1);
    const double wy = fy - y0;
    for (int ox = 0; ox < out_w; ++ox) {
      const double fx = sx * ox;
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, in_w - 1);
      const double wx = fx - x0;
      const double top = (1.0 - wx) * img[y0 * in_w + x0] + wx * img[y0 * in_w + x1];
      const double bot = (1.0 - wx) * img[y1 * in_w + x0] + wx * img[y1 * in_w + x1];
      out[static_cast<std::size_t>(oy) * out_w + ox] = (1.0 - wy) * top + wy * bot;
    }
  }
  return out;
}

Dataset resize_dataset(const Dataset& ds, int out_h, int out_w) {
  if (ds.meta_h < 1 || ds.meta_w < 1) {
    throw UsageError("resize_dataset: dataset '" + ds.name +
                     "' has no image shape metadata");
  }
  if (static_cast<std::size_t>(ds.meta_h) * ds.meta_w != ds.features.cols) {
    throw ShapeError("resize_dataset: metadata does not match feature width");
  }
  if (out_h == ds.meta_h && out_w == ds.meta_w) {
    return ds;
  }
  Dataset out;
  out.name = ds.name;
  out.labels = ds.labels;
  out.meta_h = out_h;
  out.meta_w = out_w;
  out.features = Matrix(ds.features.rows, static_cast<std::size_t>(out_h) * out_w);
  for (std::size_t r = 0; r < ds.features.rows; ++r) {
    const std::vector<double> img =
        resize_image(ds.features.row(r).data(), ds.meta_h, ds.meta_w, out_h, out_w);
    std::copy(img.begin(), img.end(), out.features.row(r).begin());
  }
  return out;
}

namespace {

Dataset take_rows(const Dataset& ds, const std::vector<std::size_t>& rows,
                  std::size_t begin, std::size_t end) {
  Dataset out;
  out.name = ds.name;
  out.meta_h = ds.meta_h;
  out.meta_w = ds.meta_w;
  out.features = Matrix(end - begin, ds.features.cols);
  out.labels.resize(end - begin);
  for (std::size_t i = begin; i < end; ++i) {
    const std::size_t src = rows[i];
    std::copy(ds.features.row(src).begin(), ds.features.row(src).end(),
              out.features.row(i - begin).begin());
    out.labels[i - begin] = ds.labels[src];
  }
  return out;
}

std::vector<std::size_t> shuffled_rows(const Dataset& ds, std::uint64_t seed) {
  std::vector<std::size_t> rows(ds.size());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  rng::Prng prng(rng::mix(seed, {rng::kPartition}));
  prng.shuffle(rows);
  return rows;
}

}  // namespace

std::pair<Dataset, Dataset> train_test_split(const Dataset& ds, std::uint64_t seed) {
  ds.validate();
  const std::vector<std::size_t> rows = shuffled_rows(ds, seed);
  const std::size_t train_n = ds.size() * 8 / 10;
  return {take_rows(ds, rows, 0, train_n), take_rows(ds, rows, train_n, ds.size())};
}

std::vector<ClientShard> partition_for_clients(const Dataset& ds, int num_clients,
                                               std::uint64_t seed) {
  ds.validate();
  if (num_clients < 1) {
    throw UsageError("partition_for_clients: need at least one client");
  }
  const std::size_t n = ds.size();
  const std::size_t train_n = n * 8 / 10;
  const std::size_t test_n = n - train_n;
  const std::size_t clients = static_cast<std::size_t>(num_clients);
  if (train_n < clients || test_n < clients) {
    throw UsageError("partition_for_clients: " + std::to_string(n) +
                     " samples cannot give every one of " +
                     std::to_string(num_clients) +
                     " clients a train and a test sample");
  }
  const std::vector<std::size_t> rows = shuffled_rows(ds, seed);

  auto block = [&](std::size_t total, std::size_t k) {
    // contiguous equal blocks, remainder to earlier clients
    const std::size_t base = total / clients;
    const std::size_t rem = total % clients;
    const std::size_t begin = k * base + std::min(k, rem);
    const std::size_t size = base + (k < rem ? 1 : 0);
    return std::pair<std::size_t, std::size_t>{begin, begin + size};
  };

  std::vector<ClientShard> shards;
  shards.reserve(clients);
  for (std::size_t k = 0; k < clients; ++k) {
    ClientShard shard;
    shard.client_id = static_cast<int>(k);
    const auto [tb, te] = block(train_n, k);
    shard.train = take_rows(ds, rows, tb, te);
    const auto [sb, se] = block(test_n, k);
    shard.test = take_rows(ds, rows, train_n + sb, train_n + se);
    shards.push_back(std::move(shard));
  }
  return shards;
}

std::vector<std::size_t> epoch_sample(const Dataset& ds, std::size_t k,
                                      std::uint64_t seed, std::uint64_t epoch_idx) {
  if (k > ds.size()) {
    throw UsageError("epoch_sample: requested " + std::to_string(k) + " of " +
                     std::to_string(ds.size()) + " samples");
  }
  rng::Prng prng(rng::mix(seed, {rng::kEpoch, epoch_idx}));
  return prng.sample_without_replacement(ds.size(), k);
}

namespace {

constexpr char kCacheMagic[8] = {'Q', 'F', 'L', 'D', 'S', 'E', 'T', '1'};

template <typename T>
void write_pod(std::ostream& out, T value) {
  static_assert(std::endian::native == std::endian::little,
                "cache format is little-endian");
  out.write(reinterpret_cast<const char*>(&value), sizeof(value));
}

template <typename T>
T read_pod(std::istream& in, const std::string& origin) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(value));
  if (!in) {
    throw FormatError("dataset cache truncated: " + origin);
  }
  return value;
}

}  // namespace

void save_cache(const Dataset& ds, const std::filesystem::path& path) {
  ds.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot write dataset cache: " + path.string());
  }
  out.write(kCacheMagic, sizeof(kCacheMagic));
  write_pod(out, static_cast<std::uint32_t>(ds.name.size()));
  out.write(ds.name.data(), static_cast<std::streamsize>(ds.name.size()));
  write_pod(out, static_cast<std::uint64_t>(ds.features.rows));
  write_pod(out, static_cast<std::uint64_t>(ds.features.cols));
  write_pod(out, static_cast<std::uint32_t>(ds.meta_h));
  write_pod(out, static_cast<std::uint32_t>(ds.meta_w));
  out.write(reinterpret_cast<const char*>(ds.features.values.data()),
            static_cast<std::streamsize>(ds.features.values.size() * sizeof(double)));
  for (int label : ds.labels) {
    write_pod(out, static_cast<std::uint8_t>(label));
  }
  if (!out) {
    throw IoError("short write to dataset cache: " + path.string());
  }
}

Dataset load_cache(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw NotFoundError("cannot open dataset cache: " + path.string());
  }
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kCacheMagic, sizeof(magic)) != 0) {
    throw FormatError("bad dataset cache magic: " + path.string());
  }
  Dataset ds;
  const auto name_len = read_pod<std::uint32_t>(in, path.string());
  ds.name.resize(name_len);
  in.read(ds.name.data(), name_len);
  const auto rows = read_pod<std::uint64_t>(in, path.string());
  const auto cols = read_pod<std::uint64_t>(in, path.string());
  ds.meta_h = static_cast<int>(read_pod<std::uint32_t>(in, path.string()));
  ds.meta_w = static_cast<int>(read_pod<std::uint32_t>(in, path.string()));
  ds.features = Matrix(rows, cols);
  in.read(reinterpret_cast<char*>(ds.features.values.data()),
          static_cast<std::streamsize>(rows * cols * sizeof(double)));
  ds.labels.resize(rows);
  for (std::uint64_t i = 0; i < rows; ++i) {
    ds.labels[i] = read_pod<std::uint8_t>(in, path.string());
  }
  if (!in) {
    throw FormatError("dataset cache truncated: " + path.string());
  }
  return ds;
}

}  // namespace qfl::data
