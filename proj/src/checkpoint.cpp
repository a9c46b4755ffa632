#include <cstdint>
#include <cstring>
#include <fstream>

#include "bpr/network.hpp"

// Checkpoint container, version 1 (full layout in docs/formats.md):
//   8-byte magic "BPNETCK1", then little-endian u32 fields: version, n_iter,
//   nsets, feature_width, n_convs, followed by (in_ch, out_ch) per conv.
//   Then per iteration, in declared order: step size, each conv's weights
//   [out][in][3][3] and biases, each norm layer's gamma, beta, running_mean,
//   running_var. All numeric payload is little-endian IEEE float32.

namespace bpr {
namespace {

constexpr char kMagic[8] = {'B', 'P', 'N', 'E', 'T', 'C', 'K', '1'};
constexpr uint32_t kVersion = 1;

void write_u32(std::ofstream& f, uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  f.write(reinterpret_cast<const char*>(b), 4);
}

uint32_t read_u32(std::ifstream& f) {
  unsigned char b[4];
  f.read(reinterpret_cast<char*>(b), 4);
  if (!f) throw IoError("checkpoint: truncated header");
  return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
         (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

void write_f32_array(std::ofstream& f, const std::vector<double>& values) {
  for (double d : values) {
    const float v = static_cast<float>(d);
    uint32_t bits;
    std::memcpy(&bits, &v, 4);
    write_u32(f, bits);
  }
}

void read_f32_array(std::ifstream& f, std::vector<double>& values) {
  for (double& d : values) {
    const uint32_t bits = read_u32(f);
    float v;
    std::memcpy(&v, &bits, 4);
    d = static_cast<double>(v);
  }
}

} // namespace

void save_checkpoint(const std::string& path, const UnrolledNetParams& params) {
  params.validate();
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("checkpoint: cannot open " + path + " for writing");
  f.write(kMagic, sizeof(kMagic));
  write_u32(f, kVersion);
  write_u32(f, static_cast<uint32_t>(params.n_iter()));
  write_u32(f, static_cast<uint32_t>(params.nsets));
  write_u32(f, static_cast<uint32_t>(params.feature_width));
  const auto& convs = params.iterations[0].denoiser.convs;
  write_u32(f, static_cast<uint32_t>(convs.size()));
  for (const auto& c : convs) {
    write_u32(f, static_cast<uint32_t>(c.in_ch));
    write_u32(f, static_cast<uint32_t>(c.out_ch));
  }
  for (const auto& iter : params.iterations) {
    write_f32_array(f, {iter.step_size});
    for (const auto& c : iter.denoiser.convs) {
      write_f32_array(f, c.w);
      write_f32_array(f, c.b);
    }
    for (const auto& n : iter.denoiser.norms) {
      write_f32_array(f, n.gamma);
      write_f32_array(f, n.beta);
      write_f32_array(f, n.running_mean);
      write_f32_array(f, n.running_var);
    }
  }
  if (!f) throw IoError("checkpoint: write failed for " + path);
}

UnrolledNetParams load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("checkpoint: cannot open " + path);
  char magic[8];
  f.read(magic, sizeof(magic));
  if (!f || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw IoError("checkpoint: bad magic in " + path);
  const uint32_t version = read_u32(f);
  if (version != kVersion)
    throw IoError("checkpoint: unsupported version " + std::to_string(version));
  const uint32_t n_iter = read_u32(f);
  const uint32_t nsets = read_u32(f);
  const uint32_t feature_width = read_u32(f);
  const uint32_t n_convs = read_u32(f);
  if (n_iter == 0 || n_iter > 64 || nsets == 0 || nsets > 2 || feature_width == 0 ||
      feature_width > 4096 || n_convs != 7)
    throw IoError("checkpoint: implausible header in " + path);
  std::vector<std::pair<int, int>> conv_dims(n_convs);
  for (auto& [in_ch, out_ch] : conv_dims) {
    in_ch = static_cast<int>(read_u32(f));
    out_ch = static_cast<int>(read_u32(f));
  }

  UnrolledNetParams params;
  params.nsets = static_cast<int>(nsets);
  params.feature_width = static_cast<int>(feature_width);
  for (uint32_t i = 0; i < n_iter; ++i) {
    IterationParams iter;
    iter.denoiser = DenoiserParams::identity(params.nsets, params.feature_width);
    for (size_t l = 0; l < conv_dims.size(); ++l)
      if (iter.denoiser.convs[l].in_ch != conv_dims[l].first ||
          iter.denoiser.convs[l].out_ch != conv_dims[l].second)
        throw IoError("checkpoint: conv layer dims inconsistent with header");
    std::vector<double> t(1);
    read_f32_array(f, t);
    iter.step_size = t[0];
    for (auto& c : iter.denoiser.convs) {
      read_f32_array(f, c.w);
      read_f32_array(f, c.b);
    }
    for (auto& n : iter.denoiser.norms) {
      read_f32_array(f, n.gamma);
      read_f32_array(f, n.beta);
      read_f32_array(f, n.running_mean);
      read_f32_array(f, n.running_var);
    }
    params.iterations.push_back(std::move(iter));
  }
  f.peek();
  if (!f.eof()) throw IoError("checkpoint: trailing bytes in " + path);
  params.validate();
  return params;
}

} // namespace bpr
