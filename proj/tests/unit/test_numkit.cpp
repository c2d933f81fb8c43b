#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "fd_oracle.hpp"
#include "fgaug/errors.hpp"
#include "fgaug/numkit/checkpoint.hpp"
#include "fgaug/numkit/graph.hpp"
#include "fgaug/numkit/kernels.hpp"
#include "fgaug/numkit/layers.hpp"

using namespace fgaug;
using namespace fgaug::numkit;
using fgaug::testing::gradient_check;
using fgaug::testing::random_tensor;

namespace {

// Direct summation of the cross-correlation definition.
Tensor conv_oracle(const Tensor& x, const Tensor& k, std::size_t s, std::size_t p) {
  const std::size_t ho = (x.dim(2) + 2 * p - k.dim(2)) / s + 1;
  const std::size_t wo = (x.dim(3) + 2 * p - k.dim(3)) / s + 1;
  Tensor y({x.dim(0), k.dim(0), ho, wo});
  for (std::size_t n = 0; n < x.dim(0); ++n)
    for (std::size_t o = 0; o < k.dim(0); ++o)
      for (std::size_t i = 0; i < ho; ++i)
        for (std::size_t j = 0; j < wo; ++j) {
          double acc = 0.0;
          for (std::size_t c = 0; c < x.dim(1); ++c)
            for (std::size_t u = 0; u < k.dim(2); ++u)
              for (std::size_t v = 0; v < k.dim(3); ++v) {
                const long yy = long(i * s + u) - long(p);
                const long xx = long(j * s + v) - long(p);
                if (yy < 0 || xx < 0 || yy >= long(x.dim(2)) || xx >= long(x.dim(3))) continue;
                acc += x.at(n, c, yy, xx) * k.at(o, c, u, v);
              }
          y.at(n, o, i, j) = acc;
        }
  return y;
}

Tensor eval_conv(const Tensor& x, const Tensor& k, std::size_t s, std::size_t p) {
  Graph g;
  return conv2d(g.input(x), g.input(k), s, p).value();
}

Tensor eval_deconv(const Tensor& x, const Tensor& k, std::size_t s, std::size_t p) {
  Graph g;
  return deconv2d(g.input(x), g.input(k), s, p).value();
}

}  // namespace

TEST_CASE("tensor invariants") {
  Tensor t({2, 3});
  CHECK(t.numel() == 6);
  CHECK_THROWS_AS(Tensor({2, 2}, {1.0, 2.0, 3.0}), DimensionError);
  CHECK_THROWS_AS(Tensor({0, 2}), DimensionError);
}

TEST_CASE("conv2d examples") {
  Rng rng(1);
  SUBCASE("identity 1x1 kernel") {
    Tensor x = random_tensor({1, 1, 3, 3}, rng);
    Tensor k({1, 1, 1, 1}, 1.0);
    CHECK(eval_conv(x, k, 1, 0).data == x.data);
  }
  SUBCASE("zero kernel") {
    Tensor x = random_tensor({1, 2, 5, 4}, rng);
    Tensor k({3, 2, 3, 3}, 0.0);
    for (double v : eval_conv(x, k, 1, 1).data) CHECK(v == 0.0);
  }
  SUBCASE("2x2 all-ones kernel sums the window") {
    Tensor x({1, 1, 2, 2}, {1, 2, 3, 4});
    Tensor k({1, 1, 2, 2}, 1.0);
    Tensor y = eval_conv(x, k, 1, 0);
    CHECK(y.shape == Shape{1, 1, 1, 1});
    CHECK(y.data[0] == 10.0);
  }
  SUBCASE("matches direct summation with stride and padding") {
    for (std::size_t s : {1u, 2u, 3u}) {
      for (std::size_t p : {0u, 1u, 2u}) {
        Tensor x = random_tensor({2, 3, 7, 6}, rng);
        Tensor k = random_tensor({4, 3, 3, 2}, rng);
        Tensor got = eval_conv(x, k, s, p);
        Tensor want = conv_oracle(x, k, s, p);
        REQUIRE(got.shape == want.shape);
        for (std::size_t i = 0; i < got.numel(); ++i) CHECK(got.data[i] == doctest::Approx(want.data[i]).epsilon(1e-12));
      }
    }
  }
  SUBCASE("channel mismatch is a dimension error") {
    Tensor x({1, 2, 4, 4});
    Tensor k({1, 3, 3, 3});
    CHECK_THROWS_AS(eval_conv(x, k, 1, 0), DimensionError);
  }
  SUBCASE("kernel larger than padded input") {
    Tensor x({1, 1, 2, 2});
    Tensor k({1, 1, 5, 5});
    CHECK_THROWS_AS(eval_conv(x, k, 1, 1), DimensionError);
  }
}

TEST_CASE("deconv2d examples") {
  Rng rng(2);
  SUBCASE("unit kernel is identity") {
    Tensor x = random_tensor({1, 1, 4, 3}, rng);
    Tensor k({1, 1, 1, 1}, 1.0);
    CHECK(eval_deconv(x, k, 1, 0).data == x.data);
  }
  SUBCASE("direct placement") {
    Tensor x({1, 1, 1, 1}, {5.0});
    Tensor k({1, 1, 2, 2}, 1.0);
    Tensor y = eval_deconv(x, k, 2, 0);
    CHECK(y.shape == Shape{1, 1, 2, 2});
    for (double v : y.data) CHECK(v == 5.0);
  }
  SUBCASE("output size formula") {
    Tensor x({1, 2, 5, 3});
    Tensor k({2, 4, 4, 4});
    Tensor y = eval_deconv(x, k, 2, 1);
    CHECK(y.shape == Shape{1, 4, (5 - 1) * 2 - 2 + 4, (3 - 1) * 2 - 2 + 4});
  }
  SUBCASE("channel mismatch") {
    CHECK_THROWS_AS(eval_deconv(Tensor({1, 3, 2, 2}), Tensor({2, 1, 2, 2}), 1, 0),
                    DimensionError);
  }
}

TEST_CASE("deconv2d is the adjoint of conv2d") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    const std::size_t s = 1 + seed % 3, p = seed % 2, kk = 2 + seed % 3;
    const std::size_t ho = 3 + seed % 2, wo = 2 + seed % 3;
    const std::size_t h = (ho - 1) * s + kk - 2 * p, w = (wo - 1) * s + kk - 2 * p;
    Tensor x = random_tensor({2, 3, h, w}, rng);
    Tensor k = random_tensor({4, 3, kk, kk}, rng);
    Tensor y = random_tensor({2, 4, ho, wo}, rng);
    const double lhs = dot(eval_conv(x, k, s, p), y);
    const double rhs = dot(x, eval_deconv(y, k, s, p));
    CHECK(std::abs(lhs - rhs) <= 1e-9 * std::max(1.0, std::abs(lhs)));
  }
}

TEST_CASE("conv2d then deconv2d restores spatial size") {
  for (std::size_t h : {8u, 16u, 64u}) {
    Tensor x({1, 1, h, h});
    Tensor k({1, 1, 4, 4}, 0.1);
    Tensor down = eval_conv(x, k, 2, 1);
    Tensor up = eval_deconv(down, k, 2, 1);
    CHECK(up.shape == x.shape);
  }
}

TEST_CASE("elementwise and activations") {
  Graph g;
  Var a = g.input(Tensor({2}, {1, 2}));
  Var b = g.input(Tensor({2}, {3, 4}));
  CHECK(add(a, b).value().data == std::vector<double>{4, 6});
  CHECK(add(a, g.input(Tensor({2}, 0.0))).value().data == a.value().data);
  CHECK(mul(a, g.input(Tensor({2}, 1.0))).value().data == a.value().data);
  CHECK_THROWS_AS(add(a, g.input(Tensor({3}))), DimensionError);

  Var x = g.input(Tensor({3}, {-1.0, 2.0, -10.0}));
  CHECK(relu(x).value().data == std::vector<double>{0.0, 2.0, 0.0});
  CHECK(leaky_relu(x, 0.2).value().data[2] == doctest::Approx(-2.0));
  CHECK(sigmoid(g.input(Tensor::scalar(0.0))).value().data[0] == 0.5);
  Var big = sigmoid(g.input(Tensor({2}, {-800.0, 800.0})));
  CHECK(big.value().data[0] >= 0.0);
  CHECK(big.value().data[1] <= 1.0);
  CHECK(all_finite(big.value()));
}

TEST_CASE("backward examples") {
  SUBCASE("sum gives ones") {
    Tensor x({4}, {1, -2, 3, 0.5});
    Graph g;
    g.backward(sum(g.param(x)));
    CHECK(x.grad == std::vector<double>(4, 1.0));
  }
  SUBCASE("sum of squares") {
    Tensor x({2}, {1, -2});
    Graph g;
    Var v = g.param(x);
    g.backward(sum(mul(v, v)));
    CHECK(x.grad == std::vector<double>{2, -4});
  }
  SUBCASE("non-participating parameter gets zero") {
    Tensor x({2}, {1, 2});
    Tensor unused({3}, {1, 2, 3});
    Graph g;
    Var v = g.param(x);
    g.param(unused);
    g.backward(sum(v));
    CHECK(unused.grad == std::vector<double>(3, 0.0));
  }
  SUBCASE("non-scalar loss is a contract error") {
    Tensor x({2}, {1, 2});
    Graph g;
    CHECK_THROWS_AS(g.backward(g.param(x)), ContractError);
  }
  SUBCASE("reverse sweep visits each node once") {
    // A diamond: x feeds two branches that merge.
    Tensor x({1}, {3.0});
    Graph g;
    Var v = g.param(x);
    Var y = add(scale(v, 2.0), mul(v, v));
    g.backward(sum(y));
    CHECK(x.grad[0] == doctest::Approx(2.0 + 6.0));
  }
}

TEST_CASE("gradient checks against finite differences") {
  using fgaug::testing::LossBuilder;
  Rng rng(11);
  auto check = [&](const char* name, const LossBuilder& fn, std::vector<Tensor> params) {
    INFO(name);
    CHECK(gradient_check(fn, std::move(params)) < 1e-4);
  };
  check("conv2d+sigmoid+sum",
        [](Graph&, std::vector<Var>& v) { return sum(sigmoid(conv2d(v[0], v[1], 2, 1))); },
        {random_tensor({1, 2, 6, 5}, rng), random_tensor({3, 2, 3, 3}, rng)});
  check("deconv2d",
        [](Graph& g, std::vector<Var>& v) {
          return sum(mul(deconv2d(v[0], v[1], 2, 1), g.input(Tensor({1, 2, 8, 6}, 0.7))));
        },
        {random_tensor({1, 3, 4, 3}, rng), random_tensor({3, 2, 4, 4}, rng)});
  check("add_bias+leaky",
        [](Graph&, std::vector<Var>& v) { return sum(mul(leaky_relu(add_bias(v[0], v[1])), v[0])); },
        {random_tensor({2, 3, 2, 2}, rng), random_tensor({3}, rng)});
  check("log+clamp+mean",
        [](Graph&, std::vector<Var>& v) { return mean(log(clamp(v[0], 0.05, 0.9))); },
        {random_tensor({5}, rng, 0.1, 0.8)});
  check("l2_norm of difference",
        [](Graph&, std::vector<Var>& v) { return scale(l2_norm(sub(v[0], v[1])), 0.25); },
        {random_tensor({2, 3}, rng), random_tensor({2, 3}, rng)});
  check("concat+pool+relu",
        [](Graph&, std::vector<Var>& v) {
          return sum(mul(global_avg_pool(relu(concat_channels(v[0], v[1]))),
                         global_avg_pool(concat_channels(v[1], v[0]))));
        },
        {random_tensor({1, 2, 3, 3}, rng), random_tensor({1, 2, 3, 3}, rng)});
  check("center_channels",
        [](Graph& g, std::vector<Var>& v) {
          Tensor w(v[0].shape());
          for (std::size_t i = 0; i < w.numel(); ++i) w.data[i] = std::cos(0.7 * double(i));
          return sum(mul(center_channels(v[0]), g.input(w)));
        },
        {random_tensor({1, 2, 3, 4}, rng)});
  check("anchor_rows+concat_rows",
        [](Graph& g, std::vector<Var>& v) {
          Var r1 = anchor_rows(v[0], 3);
          Var r2 = anchor_rows(v[1], 3);
          std::vector<Var> parts{r1, r2};
          Var all = concat_rows(parts);
          Tensor w(all.shape());
          for (std::size_t i = 0; i < w.numel(); ++i) w.data[i] = std::sin(double(i));
          return sum(mul(all, g.input(w)));
        },
        {random_tensor({1, 6, 2, 2}, rng), random_tensor({1, 3, 1, 1}, rng)});
}

TEST_CASE("anchor_rows ordering") {
  // Two anchors per cell, width 2, on a 1x2 grid: channel a*2+d, cell index.
  Tensor x({1, 4, 1, 2}, {0, 1, 10, 11, 20, 21, 30, 31});
  Graph g;
  Tensor r = anchor_rows(g.input(x), 2).value();
  CHECK(r.shape == Shape{4, 2});
  CHECK(r.data == std::vector<double>{0, 10, 20, 30, 1, 11, 21, 31});
}

TEST_CASE("straight-through binarize") {
  Tensor p({3}, {0.49, 0.5, 0.9});
  Graph g;
  Var b = straight_through_binarize(g.param(p), 0.5);
  CHECK(b.value().data == std::vector<double>{0, 1, 1});
  g.backward(sum(scale(b, 3.0)));
  CHECK(p.grad == std::vector<double>(3, 3.0));
}

TEST_CASE("sgd_step") {
  Tensor p({1}, {1.0});
  p.grad = {2.0};
  std::vector<ParamRef> params{{"p", &p}};
  sgd_step(params, 0.0);
  CHECK(p.data[0] == 1.0);
  sgd_step(params, 0.1);
  CHECK(p.data[0] == doctest::Approx(0.8));

  Tensor q({1}, {0.0});
  std::vector<ParamRef> qp{{"q", &q}};
  Graph g;
  Var v = g.param(q);
  Var d = sub(v, g.input(Tensor::scalar(3.0)));
  g.backward(sum(mul(d, d)));
  CHECK(q.grad[0] == doctest::Approx(-6.0));
  sgd_step(qp, 0.1);
  CHECK(q.data[0] == doctest::Approx(0.6));
}

TEST_CASE("determinism of forward and backward") {
  auto run = [] {
    Rng rng(99);
    Conv2d conv(3, 4, 3, 2, 1);
    init_uniform(conv.weight, 27, rng);
    Tensor x = random_tensor({1, 3, 8, 8}, rng);
    Graph g;
    Binding b{&g, true};
    Var out = sigmoid(conv(b, g.input(x)));
    g.backward(mean(out));
    return std::make_pair(out.value().data, conv.weight.grad);
  };
  CHECK(run() == run());
}

TEST_CASE("rng") {
  Rng a(5), b(5);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
  Rng r(3);
  for (int i = 0; i < 1000; ++i) {
    const auto v = r.uniform_int(1, 7);
    CHECK(v >= 1);
    CHECK(v <= 7);
    const double u = r.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
  CHECK(Rng(1).fork(0).next_u64() != Rng(1).fork(1).next_u64());
}

TEST_CASE("checkpoint container") {
  const auto dir = std::filesystem::temp_directory_path() / "fgaug_ckpt_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "a.ckpt";
  Tensor w({2, 1}, {1.5, -2.0});
  Tensor b({1}, {0.25});
  save_checkpoint(path, {{"G/w", &w}, {"G/b", &b}});

  std::ifstream is(path, std::ios::binary);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(is)), {});
  REQUIRE(bytes.size() == 4 + (4 + 3 + 4 + 8 + 16) + (4 + 3 + 4 + 4 + 8));
  CHECK(std::memcmp(bytes.data(), "MFK1", 4) == 0);
  CHECK(bytes[4] == 3);  // name length, little-endian
  CHECK(bytes[5] == 0);
  CHECK(std::string(bytes.begin() + 8, bytes.begin() + 11) == "G/w");
  CHECK(bytes[11] == 2);  // rank
  CHECK(bytes[15] == 2);  // dim 0
  CHECK(bytes[19] == 1);  // dim 1
  double first;
  std::memcpy(&first, bytes.data() + 23, 8);
  CHECK(first == 1.5);

  auto entries = load_checkpoint(path);
  REQUIRE(entries.size() == 2);
  CHECK(entries[0].name == "G/w");
  CHECK(entries[0].tensor.data == w.data);

  Tensor w2({2, 1}), b2({1});
  assign_checkpoint(entries, {{"G/w", &w2}, {"G/b", &b2}});
  CHECK(w2.data == w.data);
  Tensor wrong({3});
  CHECK_THROWS_AS(assign_checkpoint(entries, {{"G/w", &wrong}}), LoadError);
  CHECK_THROWS_AS(assign_checkpoint(entries, {{"G/missing", &b2}}), LoadError);
  CHECK_THROWS_AS(load_checkpoint(dir / "nope.ckpt"), IoError);
  std::filesystem::remove_all(dir);
}
