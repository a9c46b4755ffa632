#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "bpr/simulate.hpp"
#include "test_util.hpp"

using namespace bpr;
using namespace bpr::test;

TEST_CASE("phantoms: deterministic, bounded, finite energy") {
  PhantomSpec spec;
  spec.seed = 11;
  const ComplexGrid a = make_phantom(spec);
  const ComplexGrid b = make_phantom(spec);
  for (size_t i = 0; i < a.size(); ++i) CHECK(a.data[i] == b.data[i]);

  const double e = norm2(a);
  CHECK(e > 0.0);
  CHECK(std::isfinite(e));
  for (const auto& v : a.data) CHECK(std::abs(v) <= spec.intensity_max + 1e-12);

  PhantomSpec dark = spec;
  dark.intensity_min = dark.intensity_max = 0.0;
  CHECK(norm2(make_phantom(dark)) == 0.0);
}

TEST_CASE("coils: joint normalization and determinism") {
  for (const int nsets : {1, 2}) {
    CoilSpec spec;
    spec.nc = 5;
    spec.nsets = nsets;
    spec.seed = 3;
    const SensitivityMaps maps = make_coils(spec, 48, 40);
    CHECK(maps.nc() == 5);
    CHECK(maps.nsets() == nsets);
    maps.validate();
    for (int y = 0; y < 48; ++y)
      for (int z = 0; z < 40; ++z) {
        double s2 = 0.0;
        for (const auto& set : maps.sets)
          for (const auto& coil : set) s2 += std::norm(coil.at(y, z));
        CHECK(s2 <= 1.0 + 1e-6);
        CHECK(s2 >= 1.0 - 1e-6); // lobes cover the whole toy grid
      }
    const SensitivityMaps again = make_coils(spec, 48, 40);
    for (int c = 0; c < 5; ++c)
      for (size_t i = 0; i < maps.sets[0][c].size(); ++i)
        CHECK(maps.sets[0][c].data[i] == again.sets[0][c].data[i]);
  }
}

TEST_CASE("single unit coil reduces synthesis to fft2") {
  CoilSpec spec;
  spec.nc = 1;
  const SensitivityMaps maps = make_coils(spec, 32, 32);
  PhantomSpec pspec;
  pspec.ny = pspec.nz = 32;
  const ComplexGrid phantom = make_phantom(pspec);
  const MultiCoilKSpace k = synthesize_kspace(phantom, maps);
  REQUIRE(k.nc() == 1);
  // |S| = 1 after normalization; synthesis is fft2 of S*phantom where S has
  // only a smooth phase, so magnitudes match fft2 exactly on the diagonal test
  ComplexGrid weighted(32, 32);
  for (size_t i = 0; i < weighted.size(); ++i)
    weighted.data[i] = maps.sets[0][0].data[i] * phantom.data[i];
  CHECK(max_rel_diff(k.coils[0], fft2(weighted)) < 1e-13);
}

TEST_CASE("adjoint recovers the phantom where coil coverage is complete") {
  CoilSpec cspec;
  cspec.nc = 4;
  cspec.seed = 9;
  const SensitivityMaps maps = make_coils(cspec, 64, 64);
  PhantomSpec pspec;
  pspec.ny = pspec.nz = 64;
  pspec.seed = 4;
  const ComplexGrid phantom = make_phantom(pspec);
  const MultiCoilKSpace k = synthesize_kspace(phantom, maps);
  const ImageSet back = apply_model_adjoint(k, maps);
  CHECK(max_rel_diff(back[0], phantom) < 1e-10);

  const ComplexGrid zero(64, 64);
  CHECK(norm2(synthesize_kspace(zero, maps)) == 0.0);
}
