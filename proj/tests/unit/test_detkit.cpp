#include <algorithm>
#include <cmath>
#include <numeric>

#include "doctest.h"
#include "det_oracles.hpp"
#include "fd_oracle.hpp"
#include "fgaug/detkit/detector.hpp"
#include "fgaug/detkit/eval.hpp"
#include "fgaug/detkit/loss.hpp"
#include "fgaug/detkit/matching.hpp"
#include "fgaug/detkit/nms.hpp"
#include "fgaug/detkit/priors.hpp"
#include "fgaug/errors.hpp"
#include "fgaug/numkit/rng.hpp"

using namespace fgaug;
using namespace fgaug::detkit;
using numkit::Graph;
using numkit::Rng;
using numkit::Tensor;
using numkit::Var;
using namespace fgaug::testing;

namespace {

DetectorConfig tiny_config() {
  DetectorConfig cfg;
  cfg.input_size = 8;
  cfg.num_classes = 2;
  cfg.width = 2;
  cfg.layers = {{4, 0, {2}}, {2, 0, {2}}};
  assign_linear_scales(cfg.layers, 0.3, 0.8);
  return cfg;
}

}  // namespace

TEST_CASE("iou") {
  CHECK(iou({0, 0, 2, 2}, {0, 0, 2, 2}) == 1.0);
  CHECK(iou({0, 0, 1, 1}, {2, 2, 3, 3}) == 0.0);
  CHECK(iou({0, 0, 0, 1}, {0, 0, 1, 1}) == 0.0);
  CHECK(iou({0, 0, 2, 2}, {1, 1, 3, 3}) == doctest::Approx(1.0 / 7).epsilon(1e-12));
  CHECK(raster_iou({0, 0, 2, 2}, {1, 1, 3, 3}, 0.01) == doctest::Approx(1.0 / 7).epsilon(1e-3));
  Rng rng(3);
  for (int t = 0; t < 200; ++t) {
    Box a = random_box(rng, 0, 4), b = random_box(rng, 0, 4);
    CHECK(iou(a, b) == iou(b, a));
    CHECK(iou(a, a) == doctest::Approx(1.0));
    CHECK(std::abs(iou(a, b) - raster_iou(a, b, 0.01)) < 0.02);
  }
}

TEST_CASE("prior boxes") {
  CHECK(gen_prior_boxes({{1, 0.5, {2}}}).size() == 4);
  CHECK(gen_prior_boxes({{3, 0.5, {2, 3, 1.6}}}).size() == 72);
  auto table = table_pyramid_specs();
  CHECK(prior_count(table) == 6724u + 3528 + 968 + 288 + 36 + 16);
  CHECK(gen_prior_boxes(table).size() == 11560);
  CHECK(table.front().scale == doctest::Approx(0.1));
  CHECK(table.back().scale == doctest::Approx(0.9));

  Rng rng(11);
  for (int t = 0; t < 30; ++t) {
    std::vector<LayerSpec> specs;
    const int n = int(rng.uniform_int(1, 4));
    for (int i = 0; i < n; ++i) {
      LayerSpec s{int(rng.uniform_int(1, 6)), 0, {}};
      const int k = int(rng.uniform_int(0, 3));
      for (int r = 0; r < k; ++r) s.aspect_ratios.push_back(1.5 + r);
      specs.push_back(s);
    }
    assign_linear_scales(specs);
    CHECK(gen_prior_boxes(specs).size() == enumerate_priors(specs));
  }

  SUBCASE("layout of one cell") {
    auto p = gen_prior_boxes({{2, 0.25, {4}}, {1, 0.5, {}}});
    REQUIRE(p.size() == 2 * 2 * 4 + 2);
    CHECK(p[0] == PriorBox{0.25, 0.25, 0.25, 0.25});
    CHECK(p[1].w == doctest::Approx(std::sqrt(0.25 * 0.5)));
    CHECK(p[2].w == doctest::Approx(0.5));
    CHECK(p[2].h == doctest::Approx(0.125));
    CHECK(p[3].w == doctest::Approx(0.125));
    CHECK(p[4].cx == 0.75);
    CHECK(p[17].w == doctest::Approx(std::sqrt(0.5)));  // last layer uses s_next = 1
  }
  CHECK_THROWS_AS(gen_prior_boxes({{2, 0.2, {0.0}}}), ConfigError);
  CHECK_THROWS_AS(gen_prior_boxes({{2, 0.2, {-2}}}), ConfigError);
  CHECK_THROWS_AS(gen_prior_boxes({}), ConfigError);
}

TEST_CASE("offset encoding") {
  PriorBox p{0.5, 0.5, 0.2, 0.2};
  auto o = encode_offsets(p.corners(), p);
  for (double v : o) CHECK(v == doctest::Approx(0.0).epsilon(1e-12));
  auto e = encode_offsets({0.35, 0.4, 0.75, 0.6}, p);
  CHECK(e[0] == doctest::Approx(2.5));
  CHECK(e[1] == doctest::Approx(0.0));
  CHECK(e[2] == doctest::Approx(std::log(2.0) / 0.2));
  CHECK(e[2] == doctest::Approx(3.4657).epsilon(1e-4));
  CHECK(e[3] == doctest::Approx(0.0));
  CHECK_THROWS_AS(encode_offsets({0.5, 0.5, 0.5, 0.7}, p), ContractError);

  Rng rng(5);
  for (int t = 0; t < 500; ++t) {
    Box g = random_box(rng);
    PriorBox q{rng.uniform(), rng.uniform(), rng.uniform(0.05, 1), rng.uniform(0.05, 1)};
    Box back = decode_offsets(encode_offsets(g, q), q);
    CHECK(std::abs(back.xmin - g.xmin) < 1e-12);
    CHECK(std::abs(back.ymin - g.ymin) < 1e-12);
    CHECK(std::abs(back.xmax - g.xmax) < 1e-12);
    CHECK(std::abs(back.ymax - g.ymax) < 1e-12);
  }
}

TEST_CASE("anchor matching") {
  auto priors = gen_prior_boxes({{4, 0.3, {2}}});
  SUBCASE("gt equal to a prior") {
    auto m = match_anchors({priors[9].corners()}, priors);
    CHECK(m.assignment[9] == 0);
    CHECK(m.overlap[9] == doctest::Approx(1.0));
    CHECK(m.best_prior[0] == 9);
  }
  SUBCASE("weak overlap still gets one prior") {
    auto m = match_anchors({{0.0, 0.0, 0.02, 0.02}}, priors);
    CHECK(std::count(m.assignment.begin(), m.assignment.end(), 0) == 1);
  }
  SUBCASE("no gts") {
    auto m = match_anchors({}, priors);
    CHECK(std::all_of(m.assignment.begin(), m.assignment.end(), [](int a) { return a < 0; }));
  }
  SUBCASE("random cases agree with brute force") {
    Rng rng(21);
    std::vector<PriorBox> ps;
    for (int i = 0; i < 200; ++i)
      ps.push_back({rng.uniform(), rng.uniform(), rng.uniform(0.05, 0.6), rng.uniform(0.05, 0.6)});
    for (int t = 0; t < 30; ++t) {
      std::vector<Box> gts;
      for (int g = 0; g < 5; ++g) gts.push_back(random_box(rng));
      auto a = match_anchors(gts, ps, 0.5);
      auto b = brute_force_match(gts, ps, 0.5);
      CHECK(a.assignment == b.assignment);
      CHECK(a.best_prior == b.best_prior);
      for (std::size_t g = 0; g < gts.size(); ++g)
        CHECK(std::count(a.assignment.begin(), a.assignment.end(), int(g)) >= 1);
    }
  }
}

TEST_CASE("detection loss") {
  SUBCASE("three-anchor hand computation") {
    // Anchor 0 matched to class 1 (label 2), anchors 1-2 background.
    DetectionTargets t;
    t.labels = {2, 0, 0};
    t.offsets = {Offsets{0.5, -0.2, 2.0, 0.0}, Offsets{}, Offsets{}};
    Graph g;
    Tensor z({3, 3}, {0.1, 0.2, 0.7, 1.0, 0.0, 2.0, 0.5, 0.5, 0.5});
    Tensor o({3, 4}, {0.0, 0.0, 0.0, 0.0, 9, 9, 9, 9, 9, 9, 9, 9});
    LossOptions opts;
    opts.neg_pos_ratio = 1;  // keeps the harder negative only
    auto l = detection_loss(g.input(z), g.input(o), t, opts);
    auto ce = [](std::vector<double> r, int k) {
      double s = 0;
      for (double v : r) s += std::exp(v);
      return std::log(s) - r[k];
    };
    const double c0 = ce({0.1, 0.2, 0.7}, 2);
    const double c1 = ce({1.0, 0.0, 2.0}, 0), c2 = ce({0.5, 0.5, 0.5}, 0);
    REQUIRE(c1 > c2);
    const double loc = 0.5 * 0.25 + 0.5 * 0.04 + 1.5 + 0.0;
    CHECK(l.cls == doctest::Approx(c0 + c1));
    CHECK(l.loc == doctest::Approx(loc));
    CHECK(l.loss.value().data[0] == doctest::Approx(c0 + c1 + loc));
    CHECK(l.num_matched == 1);
  }
  SUBCASE("perfect offsets give zero loc") {
    DetectionTargets t{{1, 0}, {Offsets{0.3, 0.1, -0.2, 0.4}, Offsets{}}};
    Graph g;
    auto l = detection_loss(g.input(Tensor({2, 2})), g.input(Tensor({2, 4}, {0.3, 0.1, -0.2, 0.4, 1, 1, 1, 1})), t);
    CHECK(l.loc == 0.0);
  }
  SUBCASE("no matches") {
    DetectionTargets t{{0, 0}, {Offsets{}, Offsets{}}};
    Graph g;
    auto l = detection_loss(g.input(Tensor({2, 2})), g.input(Tensor({2, 4})), t);
    CHECK(l.no_matches);
    CHECK(l.loc == 0.0);
    CHECK(l.loss.value().data[0] == 0.0);
  }
  SUBCASE("count mismatch") {
    DetectionTargets t{{0}, {Offsets{}}};
    Graph g;
    CHECK_THROWS_AS(detection_loss(g.input(Tensor({2, 2})), g.input(Tensor({2, 4})), t),
                    ContractError);
  }
  SUBCASE("finite differences") {
    Rng rng(8);
    DetectionTargets t;
    for (int p = 0; p < 12; ++p) {
      t.labels.push_back(p % 4 == 0 ? 1 + p % 3 : 0);
      t.offsets.push_back({rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-3, 3), 0.2});
    }
    testing::LossBuilder build = [&](Graph&, std::vector<Var>& v) {
      return detection_loss(v[0], v[1], t).loss;
    };
    std::vector<Tensor> params{testing::random_tensor({12, 4}, rng, -2, 2),
                               testing::random_tensor({12, 4}, rng, -2, 2)};
    CHECK(testing::gradient_check(build, params) < 1e-6);
  }
}

TEST_CASE("nms") {
  std::vector<Detection> one{{{0, 0, 1, 1}, 0, 0.5}};
  CHECK(nms(one) == std::vector<std::size_t>{0});
  std::vector<Detection> twins{{{0, 0, 1, 1}, 0, 0.8}, {{0, 0, 1, 1}, 0, 0.9}};
  CHECK(nms(twins) == std::vector<std::size_t>{1});
  twins[0].class_id = 1;
  CHECK(nms(twins).size() == 2);
  CHECK(nms(twins, 0.45, false).size() == 1);

  Rng rng(99);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<Detection> d;
    const int n = int(rng.uniform_int(0, 10));
    for (int i = 0; i < n; ++i)
      d.push_back({random_box(rng), int(rng.uniform_int(0, 1)), std::round(rng.uniform() * 10) / 10});
    auto kept = nms(d, 0.45);
    REQUIRE(kept == reference_nms(d, 0.45));
    for (std::size_t a = 0; a < kept.size(); ++a)
      for (std::size_t b = a + 1; b < kept.size(); ++b)
        if (d[kept[a]].class_id == d[kept[b]].class_id)
          CHECK(iou(d[kept[a]].box, d[kept[b]].box) <= 0.45);
  }
}

TEST_CASE("mAP evaluation") {
  const Box gt{0, 0, 10, 10};
  auto single = [&](Box b) {
    return eval_map({{{b, 0, 0.9}}}, {{{gt, 0, false}}}, 1).map;
  };
  CHECK(single({0, 0, 10, 9}) == doctest::Approx(1.0));
  CHECK(single({0, 0, 10, 3}) == 0.0);

  SUBCASE("ranked pair") {
    std::vector<Detection> d{{gt, 0, 0.9}, {{50, 50, 60, 60}, 0, 0.8}};
    auto r = eval_map({d}, {{{gt, 0, false}}}, 1);
    CHECK(r.map == doctest::Approx(direct_11pt({{1.0, 1.0}, {0.5, 1.0}})));
    CHECK(r.map == doctest::Approx(1.0));
    std::swap(d[0].confidence, d[1].confidence);
    r = eval_map({d}, {{{gt, 0, false}}}, 1);
    // FP first then TP: PR points (0, 0) and (0.5, 1).
    CHECK(r.map == doctest::Approx(direct_11pt({{0.0, 0.0}, {0.5, 1.0}})));
    CHECK(r.map == doctest::Approx(0.5));
  }
  SUBCASE("duplicate detections count once") {
    std::vector<Detection> d{{gt, 0, 0.9}, {gt, 0, 0.8}};
    auto r = eval_map({d}, {{{gt, 0, false}}}, 1);
    CHECK(r.map == doctest::Approx(1.0));  // recall reaches 1 at precision 1
  }
  SUBCASE("missing class excluded with note") {
    auto r = eval_map({{{gt, 0, 0.9}}}, {{{gt, 0, false}}}, 2);
    CHECK(r.ap[0].has_value());
    CHECK_FALSE(r.ap[1].has_value());
    CHECK(r.map == doctest::Approx(1.0));
    CHECK(r.notes.size() == 1);
  }
  SUBCASE("difficult gts are ignored") {
    auto r = eval_map({{{gt, 0, 0.9}, {{20, 20, 30, 30}, 0, 0.95}}},
                      {{{gt, 0, false}, {{20, 20, 30, 30}, 0, true}}}, 1);
    CHECK(r.map == doctest::Approx(1.0));
  }
  SUBCASE("permutation invariance") {
    Rng rng(2);
    std::vector<std::vector<Detection>> dets(4);
    std::vector<std::vector<GroundTruth>> gts(4);
    for (int i = 0; i < 4; ++i) {
      for (int k = 0; k < 3; ++k) gts[i].push_back({random_box(rng, 0, 50), int(rng.uniform_int(0, 2)), false});
      for (int k = 0; k < 8; ++k)
        dets[i].push_back({random_box(rng, 0, 50), int(rng.uniform_int(0, 2)),
                           std::round(rng.uniform() * 4) / 4});
      for (int k = 0; k < 3; ++k) dets[i].push_back({gts[i][k].box, gts[i][k].class_id, 0.5});
    }
    const auto base = eval_map(dets, gts, 3);
    for (int t = 0; t < 20; ++t) {
      for (auto& v : dets)
        for (std::size_t k = v.size(); k > 1; --k) std::swap(v[k - 1], v[rng.uniform_int(0, k - 1)]);
      auto r = eval_map(dets, gts, 3);
      CHECK(r.map == base.map);
    }
  }
  SUBCASE("table formatting") {
    auto r = eval_map({{{gt, 0, 0.9}}}, {{{gt, 0, false}}}, 2);
    auto s = format_ap_table(r, {"rect", "ellipse"}, "test");
    CHECK(s.find("rect") != std::string::npos);
    CHECK(s.find("n/a") != std::string::npos);
    CHECK(s.find("100.0") != std::string::npos);
  }
}

TEST_CASE("detector") {
  SUBCASE("output rows match priors") {
    DetectorConfig cfg;
    Detector det(cfg, 1);
    Graph g;
    auto out = det.forward({&g, false}, g.input(Tensor({1, 3, 64, 64}, 0.3)));
    CHECK(out.logits.shape() == numkit::Shape{det.priors().size(), 4});
    CHECK(out.offsets.shape() == numkit::Shape{det.priors().size(), 4});
    CHECK(det.priors().size() == prior_count(cfg.layers));
    CHECK_THROWS_AS(det.forward({&g, false}, g.input(Tensor({1, 3, 32, 32}))), ContractError);
  }
  SUBCASE("odd resolutions") {
    DetectorConfig cfg;
    cfg.input_size = 41;
    cfg.layers = {{11, 0, {2}}, {6, 0, {2}}, {3, 0, {2}}};
    assign_linear_scales(cfg.layers);
    Detector det(cfg, 1);
    Graph g;
    auto out = det.forward({&g, false}, g.input(Tensor({1, 3, 41, 41}, 0.3)));
    CHECK(out.logits.shape()[0] == prior_count(cfg.layers));
  }
  SUBCASE("bad layer chain") {
    DetectorConfig cfg;
    cfg.layers = {{8, 0.2, {2}}, {3, 0.5, {2}}};
    CHECK_THROWS_AS(Detector(cfg, 1), ConfigError);
  }
  SUBCASE("fusion choice is wired") {
    DetectorConfig add_cfg = tiny_config(), mul_cfg = tiny_config();
    mul_cfg.fusion = Fusion::Mul;
    Detector a(add_cfg, 4), b(mul_cfg, 4);
    Rng rng(1);
    Tensor img = testing::random_tensor({1, 3, 8, 8}, rng, 0, 1);
    Graph g;
    auto oa = a.forward({&g, false}, g.input(img));
    auto ob = b.forward({&g, false}, g.input(img));
    CHECK_FALSE(oa.logits.value().data == ob.logits.value().data);
  }
  SUBCASE("zero weights give uniform scores") {
    Detector det(tiny_config(), 4);
    for (auto& p : det.parameters()) std::fill(p.tensor->data.begin(), p.tensor->data.end(), 0.0);
    Graph g;
    auto out = det.forward({&g, false}, g.input(Tensor({1, 3, 8, 8}, 0.7)));
    for (double v : softmax_rows(out.logits.value())) CHECK(v == doctest::Approx(1.0 / 3));
  }
  SUBCASE("loss gradients against finite differences") {
    Detector det(tiny_config(), 9);
    Rng rng(6);
    Tensor img = testing::random_tensor({1, 3, 8, 8}, rng, 0, 1);
    std::vector<Box> gts{{0.1, 0.2, 0.6, 0.7}, {0.5, 0.4, 0.95, 0.9}};
    auto targets = build_targets(match_anchors(gts, det.priors()), gts, {0, 1}, det.priors());
    auto params = det.parameters();
    // Random biases keep pre-activations away from the ReLU kink at exactly 0.
    for (auto& p : params)
      if (p.name.ends_with("bias"))
        for (double& v : p.tensor->data) v = rng.uniform(-0.3, 0.3);
    auto loss_at = [&](bool trainable) {
      Graph g;
      auto out = det.forward({&g, trainable}, g.input(img));
      auto l = detection_loss(out.logits, out.offsets, targets);
      if (trainable) g.backward(l.loss);
      return l.loss.value().data[0];
    };
    numkit::zero_grads(params);
    loss_at(true);
    std::vector<std::vector<double>> analytic, numeric;
    for (auto& p : params) {
      analytic.push_back(p.tensor->grad);
      std::vector<double> n(p.tensor->numel());
      for (std::size_t i = 0; i < n.size(); ++i) {
        double& w = p.tensor->data[i];
        const double orig = w;
        w = orig + 1e-6;
        const double up = loss_at(false);
        w = orig - 1e-6;
        const double down = loss_at(false);
        w = orig;
        n[i] = (up - down) / 2e-6;
      }
      numeric.push_back(n);
    }
    CHECK(testing::max_relative_error(analytic, numeric) < 1e-4);
  }
  SUBCASE("detect returns pixel boxes") {
    Detector det(DetectorConfig{}, 3);
    imageio::Image img(64, 64, 3, 0.4);
    auto dets = det.detect(img);
    CHECK(dets.size() <= 100);
    for (const auto& d : dets) {
      CHECK(d.box.xmin >= 0.0);
      CHECK(d.box.xmax <= 64.0);
      CHECK(d.confidence > 0.01);
    }
  }
}
