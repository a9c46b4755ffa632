#include "bpr/gridfile.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "bpr/fft.hpp"

namespace bpr {
namespace {

constexpr const char* kMagic = "BPGRID 1";

static_assert(std::endian::native == std::endian::little,
              "payload I/O assumes a little-endian host");

size_t element_bytes(const std::string& dtype) {
  if (dtype == "c64") return 8;
  if (dtype == "c128") return 16;
  if (dtype == "f32") return 4;
  if (dtype == "f64") return 8;
  throw IoError("grid file: unknown dtype tag '" + dtype + "'");
}

std::string join(const std::vector<std::string>& parts) {
  std::string s;
  for (size_t i = 0; i < parts.size(); ++i) {
    if (i) s += ' ';
    s += parts[i];
  }
  return s;
}

} // namespace

long GridData::element_count() const {
  long n = 1;
  for (int d : dims) {
    if (d <= 0) throw IoError("grid file: non-positive dimension");
    n *= d;
  }
  return dims.empty() ? 0 : n;
}

void write_grid(const std::string& path, const GridData& grid) {
  if (grid.dims.empty()) throw IoError("grid file: empty dims rejected");
  const long n = grid.element_count();
  if (grid.is_complex() ? static_cast<long>(grid.cdata.size()) != n
                        : static_cast<long>(grid.rdata.size()) != n)
    throw IoError("grid file: payload length inconsistent with dims");
  if (grid.axes.size() != grid.dims.size())
    throw IoError("grid file: need one axis label per dimension");

  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("grid file: cannot open " + path + " for writing");
  f << kMagic << '\n';
  f << "dtype " << grid.dtype << '\n';
  f << "dims";
  for (int d : grid.dims) f << ' ' << d;
  f << '\n';
  f << "axes " << join(grid.axes) << '\n';
  for (const auto& [k, v] : grid.meta) f << "meta " << k << ' ' << v << '\n';
  f << "end\n";

  element_bytes(grid.dtype); // validates the tag
  if (grid.dtype == "c128") {
    f.write(reinterpret_cast<const char*>(grid.cdata.data()),
            static_cast<std::streamsize>(grid.cdata.size() * sizeof(cdouble)));
  } else if (grid.dtype == "c64") {
    std::vector<float> buf(grid.cdata.size() * 2);
    for (size_t i = 0; i < grid.cdata.size(); ++i) {
      buf[2 * i] = static_cast<float>(grid.cdata[i].real());
      buf[2 * i + 1] = static_cast<float>(grid.cdata[i].imag());
    }
    f.write(reinterpret_cast<const char*>(buf.data()),
            static_cast<std::streamsize>(buf.size() * sizeof(float)));
  } else if (grid.dtype == "f64") {
    f.write(reinterpret_cast<const char*>(grid.rdata.data()),
            static_cast<std::streamsize>(grid.rdata.size() * sizeof(double)));
  } else {
    std::vector<float> buf(grid.rdata.begin(), grid.rdata.end());
    f.write(reinterpret_cast<const char*>(buf.data()),
            static_cast<std::streamsize>(buf.size() * sizeof(float)));
  }
  if (!f) throw IoError("grid file: write failed for " + path);
}

GridData read_grid(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("grid file: cannot open " + path);
  std::string line;
  if (!std::getline(f, line) || line != kMagic)
    throw IoError("grid file: bad magic in " + path);
  GridData grid;
  bool saw_end = false;
  while (std::getline(f, line)) {
    if (line == "end") {
      saw_end = true;
      break;
    }
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "dtype") {
      ls >> grid.dtype;
    } else if (key == "dims") {
      int d;
      while (ls >> d) grid.dims.push_back(d);
    } else if (key == "axes") {
      std::string a;
      while (ls >> a) grid.axes.push_back(a);
    } else if (key == "meta") {
      std::string k;
      ls >> k;
      std::string v;
      std::getline(ls, v);
      if (!v.empty() && v.front() == ' ') v.erase(0, 1);
      grid.meta[k] = v;
    } else {
      throw IoError("grid file: unknown header line '" + line + "' in " + path);
    }
  }
  if (!saw_end) throw IoError("grid file: missing 'end' in " + path);
  if (grid.dims.empty()) throw IoError("grid file: empty dims in " + path);
  if (grid.axes.size() != grid.dims.size())
    throw IoError("grid file: axis labels inconsistent with dims in " + path);
  const long n = grid.element_count();
  const size_t eb = element_bytes(grid.dtype);
  const size_t payload = static_cast<size_t>(n) * eb;

  const auto header_end = f.tellg();
  f.seekg(0, std::ios::end);
  const auto file_end = f.tellg();
  if (static_cast<size_t>(file_end - header_end) != payload)
    throw IoError("grid file: header dims want " + std::to_string(payload) +
                  " payload bytes, file has " + std::to_string(file_end - header_end) + " (" +
                  path + ")");
  f.seekg(header_end);

  if (grid.dtype == "c128") {
    grid.cdata.resize(n);
    f.read(reinterpret_cast<char*>(grid.cdata.data()), static_cast<std::streamsize>(payload));
  } else if (grid.dtype == "c64") {
    std::vector<float> buf(static_cast<size_t>(n) * 2);
    f.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(payload));
    grid.cdata.resize(n);
    for (long i = 0; i < n; ++i) grid.cdata[i] = cdouble(buf[2 * i], buf[2 * i + 1]);
  } else if (grid.dtype == "f64") {
    grid.rdata.resize(n);
    f.read(reinterpret_cast<char*>(grid.rdata.data()), static_cast<std::streamsize>(payload));
  } else {
    std::vector<float> buf(static_cast<size_t>(n));
    f.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(payload));
    grid.rdata.assign(buf.begin(), buf.end());
  }
  if (!f) throw IoError("grid file: payload read failed for " + path);
  return grid;
}

namespace {

void check_axes(const GridData& g, const std::vector<std::string>& expected,
                const std::string& path) {
  if (g.axes != expected)
    throw IoError("grid file: expected axes '" + join(expected) + "', found '" + join(g.axes) +
                  "' in " + path);
}

} // namespace

void write_image(const std::string& path, const ComplexGrid& img,
                 const std::map<std::string, std::string>& meta) {
  GridData g;
  g.dtype = "c128";
  g.dims = {img.ny, img.nz};
  g.axes = {"y", "z"};
  g.meta = meta;
  g.cdata = img.data;
  write_grid(path, g);
}

ComplexGrid read_image(const std::string& path) {
  const GridData g = read_grid(path);
  check_axes(g, {"y", "z"}, path);
  ComplexGrid img(g.dims[0], g.dims[1]);
  img.data = g.cdata;
  if (!all_finite(img)) throw IoError("grid file: non-finite image values in " + path);
  return img;
}

void write_kspace(const std::string& path, const MultiCoilKSpace& ksp,
                  const std::map<std::string, std::string>& meta) {
  GridData g;
  g.dtype = "c128";
  g.dims = {ksp.nc(), ksp.ny(), ksp.nz()};
  g.axes = {"coil", "ky", "kz"};
  g.meta = meta;
  g.cdata.reserve(static_cast<size_t>(ksp.nc()) * ksp.ny() * ksp.nz());
  for (const auto& coil : ksp.coils) g.cdata.insert(g.cdata.end(), coil.data.begin(),
                                                    coil.data.end());
  write_grid(path, g);
}

MultiCoilKSpace read_kspace(const std::string& path) {
  const GridData g = read_grid(path);
  check_axes(g, {"coil", "ky", "kz"}, path);
  MultiCoilKSpace ksp(g.dims[0], g.dims[1], g.dims[2]);
  const size_t plane = static_cast<size_t>(g.dims[1]) * g.dims[2];
  for (int c = 0; c < g.dims[0]; ++c)
    std::copy_n(g.cdata.begin() + c * plane, plane, ksp.coils[c].data.begin());
  if (!all_finite(ksp)) throw IoError("grid file: non-finite k-space values in " + path);
  return ksp;
}

std::map<std::string, std::string> read_meta(const std::string& path) {
  return read_grid(path).meta;
}

void write_mask(const std::string& path, const RealGrid& mask,
                const std::map<std::string, std::string>& meta) {
  GridData g;
  g.dtype = "f64";
  g.dims = {mask.ny, mask.nz};
  g.axes = {"ky", "kz"};
  g.meta = meta;
  g.rdata = mask.data;
  write_grid(path, g);
}

RealGrid read_mask(const std::string& path) {
  const GridData g = read_grid(path);
  check_axes(g, {"ky", "kz"}, path);
  RealGrid mask(g.dims[0], g.dims[1]);
  mask.data = g.rdata;
  return mask;
}

void write_maps(const std::string& path, const SensitivityMaps& maps,
                const std::map<std::string, std::string>& meta) {
  GridData g;
  g.dtype = "c128";
  g.dims = {maps.nsets(), maps.nc(), maps.ny(), maps.nz()};
  g.axes = {"set", "coil", "y", "z"};
  g.meta = meta;
  for (const auto& set : maps.sets)
    for (const auto& coil : set) g.cdata.insert(g.cdata.end(), coil.data.begin(),
                                                coil.data.end());
  write_grid(path, g);
}

SensitivityMaps read_maps(const std::string& path) {
  const GridData g = read_grid(path);
  check_axes(g, {"set", "coil", "y", "z"}, path);
  SensitivityMaps maps;
  const size_t plane = static_cast<size_t>(g.dims[2]) * g.dims[3];
  size_t offset = 0;
  for (int s = 0; s < g.dims[0]; ++s) {
    std::vector<ComplexGrid> set;
    for (int c = 0; c < g.dims[1]; ++c) {
      ComplexGrid coil(g.dims[2], g.dims[3]);
      std::copy_n(g.cdata.begin() + offset, plane, coil.data.begin());
      offset += plane;
      set.push_back(std::move(coil));
    }
    maps.sets.push_back(std::move(set));
  }
  maps.validate();
  return maps;
}

std::vector<MultiCoilKSpace> slice_volume(const VolumeKSpace& volume) {
  if (volume.nc < 1 || volume.nx < 1 || volume.ny < 1 || volume.nz < 1)
    throw InvalidInput("slice_volume: bad volume dimensions");
  if (volume.data.size() !=
      static_cast<size_t>(volume.nc) * volume.nx * volume.ny * volume.nz)
    throw InvalidInput("slice_volume: data length inconsistent with dims");
  // Hybrid transform: inverse FFT along the fully sampled readout axis, then
  // one example per x position.
  std::vector<MultiCoilKSpace> examples(
      volume.nx, MultiCoilKSpace(volume.nc, volume.ny, volume.nz));
  std::vector<cdouble> line(volume.nx);
  for (int c = 0; c < volume.nc; ++c) {
    for (int y = 0; y < volume.ny; ++y) {
      for (int z = 0; z < volume.nz; ++z) {
        for (int x = 0; x < volume.nx; ++x) line[x] = volume.at(c, x, y, z);
        fft1d(line, +1);
        for (int x = 0; x < volume.nx; ++x) examples[x].coils[c].at(y, z) = line[x];
      }
    }
  }
  return examples;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
  std::ofstream f(path);
  if (!f) throw IoError("csv: cannot open " + path + " for writing");
  for (size_t i = 0; i < header.size(); ++i) f << (i ? "," : "") << header[i];
  f << '\n';
  for (const auto& row : rows) {
    if (row.size() != header.size()) throw IoError("csv: row width differs from header");
    for (size_t i = 0; i < row.size(); ++i) f << (i ? "," : "") << row[i];
    f << '\n';
  }
  if (!f) throw IoError("csv: write failed for " + path);
}

} // namespace bpr
