#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "bpr/fft.hpp"
#include "bpr/gridfile.hpp"
#include "bpr/simulate.hpp"
#include "test_util.hpp"

using namespace bpr;
using namespace bpr::test;

namespace {

struct TempFile {
  std::string path;
  explicit TempFile(std::string p) : path(std::move(p)) {}
  ~TempFile() { std::remove(path.c_str()); }
};

} // namespace

TEST_CASE("k-space round trip is bit exact at 64-bit precision") {
  Rng rng(0);
  const MultiCoilKSpace k = random_kspace(3, 20, 24, rng);
  TempFile f("io_ksp.bpg");
  write_kspace(f.path, k, {{"seed", "0"}});
  const MultiCoilKSpace back = read_kspace(f.path);
  REQUIRE(back.nc() == 3);
  for (int c = 0; c < 3; ++c)
    for (size_t i = 0; i < k.coils[c].size(); ++i)
      CHECK(back.coils[c].data[i] == k.coils[c].data[i]);
  CHECK(read_meta(f.path).at("seed") == "0");
}

TEST_CASE("image, mask, and maps round trips") {
  Rng rng(1);
  TempFile fi("io_img.bpg"), fm("io_mask.bpg"), fs("io_maps.bpg");

  const ComplexGrid img = random_grid(16, 18, rng);
  write_image(fi.path, img);
  const ComplexGrid img2 = read_image(fi.path);
  for (size_t i = 0; i < img.size(); ++i) CHECK(img2.data[i] == img.data[i]);

  const RealGrid mask = random_binary_mask(10, 12, 0.4, rng);
  write_mask(fm.path, mask);
  const RealGrid mask2 = read_mask(fm.path);
  for (size_t i = 0; i < mask.size(); ++i) CHECK(mask2.data[i] == mask.data[i]);

  const SensitivityMaps maps = make_coils({3, 0.7, 2, 5}, 14, 14);
  write_maps(fs.path, maps);
  const SensitivityMaps maps2 = read_maps(fs.path);
  REQUIRE(maps2.nsets() == 2);
  REQUIRE(maps2.nc() == 3);
  for (int s = 0; s < 2; ++s)
    for (int c = 0; c < 3; ++c)
      for (size_t i = 0; i < maps.sets[s][c].size(); ++i)
        CHECK(maps2.sets[s][c].data[i] == maps.sets[s][c].data[i]);
}

TEST_CASE("corrupt headers produce structured errors") {
  TempFile f("io_bad.bpg");
  {
    Rng rng(2);
    write_image(f.path, random_grid(8, 8, rng));
  }
  // truncate the payload: header dims no longer match
  {
    std::ifstream in(f.path, std::ios::binary);
    std::string blob((std::istreambuf_iterator<char>(in)), {});
    std::ofstream out(f.path, std::ios::binary);
    out.write(blob.data(), static_cast<std::streamsize>(blob.size() - 16));
  }
  CHECK_THROWS_AS(read_image(f.path), IoError);

  {
    std::ofstream out(f.path, std::ios::binary);
    out << "BPGRID 1\ndtype c128\ndims 0 4\naxes y z\nend\n";
  }
  CHECK_THROWS_AS(read_grid(f.path), IoError);

  {
    std::ofstream out(f.path, std::ios::binary);
    out << "NOTAGRID\n";
  }
  CHECK_THROWS_AS(read_grid(f.path), IoError);

  GridData empty_dims;
  empty_dims.dtype = "f64";
  CHECK_THROWS_AS(write_grid("io_reject.bpg", empty_dims), IoError);
}

TEST_CASE("slice_volume: single-slice identity and example count") {
  Rng rng(3);
  VolumeKSpace vol;
  vol.nc = 2;
  vol.nx = 1;
  vol.ny = 8;
  vol.nz = 8;
  vol.data.assign(2 * 1 * 8 * 8, cdouble(0, 0));
  for (auto& v : vol.data) v = cdouble(rng.next_normal(), rng.next_normal());
  const auto examples = slice_volume(vol);
  REQUIRE(examples.size() == 1);
  // a length-1 readout axis transforms trivially
  for (int c = 0; c < 2; ++c)
    for (int y = 0; y < 8; ++y)
      for (int z = 0; z < 8; ++z)
        CHECK(std::abs(examples[0].coils[c].at(y, z) - vol.at(c, 0, y, z)) < 1e-14);
}

TEST_CASE("slice_volume: restacking and forward readout FFT reproduce the volume") {
  Rng rng(4);
  VolumeKSpace vol;
  vol.nc = 2;
  vol.nx = 12;
  vol.ny = 6;
  vol.nz = 10;
  vol.data.assign(static_cast<size_t>(2) * 12 * 6 * 10, cdouble(0, 0));
  for (auto& v : vol.data) v = cdouble(rng.next_normal(), rng.next_normal());

  const auto examples = slice_volume(vol);
  REQUIRE(examples.size() == 12); // one example per readout position

  double worst = 0.0;
  std::vector<cdouble> line(12);
  for (int c = 0; c < 2; ++c)
    for (int y = 0; y < 6; ++y)
      for (int z = 0; z < 10; ++z) {
        for (int x = 0; x < 12; ++x) line[x] = examples[x].coils[c].at(y, z);
        fft1d(line, -1); // forward transform undoes the hybrid step
        for (int x = 0; x < 12; ++x)
          worst = std::max(worst, std::abs(line[x] - vol.at(c, x, y, z)));
      }
  CHECK(worst < 1e-10);
}

TEST_CASE("csv writer emits rectangular tables") {
  TempFile f("io_table.csv");
  write_csv(f.path, {"a", "b"}, {{"1", "2"}, {"3", "4"}});
  std::ifstream in(f.path);
  std::string l1, l2, l3;
  std::getline(in, l1);
  std::getline(in, l2);
  std::getline(in, l3);
  CHECK(l1 == "a,b");
  CHECK(l2 == "1,2");
  CHECK(l3 == "3,4");
  CHECK_THROWS_AS(write_csv(f.path, {"a", "b"}, {{"1"}}), IoError);
}
