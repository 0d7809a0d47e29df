// Acceptance runner: one PASS/FAIL line per criterion AC1..AC10.
// Usage: tforge_acceptance <path-to-triplet-forge> <work-dir>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "test_support.hpp"
#include "triplet_forge/anchor/triplet.hpp"
#include "triplet_forge/conditioning/streams.hpp"
#include "triplet_forge/conditioning/toy_train.hpp"
#include "triplet_forge/metrics/dataset.hpp"
#include "triplet_forge/metrics/matching.hpp"
#include "triplet_forge/metrics/pose_metrics.hpp"
#include "triplet_forge/pipeline/config.hpp"
#include "triplet_forge/reproject/pointcloud.hpp"
#include "triplet_forge/synthetic/scene.hpp"
#include "triplet_forge/trajectory/crop_trajectory.hpp"
#include "warp/scatter_oracle.hpp"

namespace fs = std::filesystem;
using namespace tforge;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

fs::path g_cli;
fs::path g_work;

int run_cli(const std::string& args, const std::string& log_name) {
  const fs::path log = g_work / (log_name + ".log");
  const std::string cmd = "\"" + g_cli.string() + "\" " + args + " > \"" + log.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string q(const fs::path& p) { return "\"" + p.string() + "\""; }

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

bool trees_identical(const fs::path& a, const fs::path& b, std::size_t& files) {
  files = 0;
  for (const auto& e : fs::recursive_directory_iterator(a)) {
    if (!e.is_regular_file()) continue;
    ++files;
    const auto other = b / fs::relative(e.path(), a);
    if (!fs::exists(other) || slurp(e.path()) != slurp(other)) return false;
  }
  std::size_t other_files = 0;
  for (const auto& e : fs::recursive_directory_iterator(b)) other_files += e.is_regular_file();
  return other_files == files;
}

std::size_t count_lines(const fs::path& p, const std::string& needle = "") {
  std::ifstream is(p);
  std::size_t n = 0;
  for (std::string line; std::getline(is, line);) n += !line.empty() && line.find(needle) != std::string::npos;
  return n;
}

// AC1: CLI determinism and wall time, plus a 16x16 anchor against the scatter oracle.
void ac1(Outcome& o) {
  o.require(run_cli("gen-synthetic-scene --out " + q(g_work / "fixture"), "gen") == 0, "gen-synthetic-scene");
  const auto t0 = std::chrono::steady_clock::now();
  const std::string common = "make-triplet --video " + q(g_work / "fixture" / "video") + " --tracks " +
                             q(g_work / "fixture" / "tracks.vtnsr") + " --seed 7 --threads 1 --out ";
  const int rc1 = run_cli(common + q(g_work / "triplet_a"), "triplet_a");
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const int rc2 = run_cli(common + q(g_work / "triplet_b"), "triplet_b");
  o.require(rc1 == 0 && rc2 == 0, "make-triplet exit status");
  std::size_t files = 0;
  const bool same = rc1 == 0 && rc2 == 0 && trees_identical(g_work / "triplet_a", g_work / "triplet_b", files);
  o.require(same, "byte-identical outputs");
  o.require(seconds < 60.0, "single-threaded run under 60 s");
  o.detail << "files=" << files << " identical=" << same << " seconds=" << seconds;

  // 16x16 sub-case: flow = track(ref->t) + src_offset(ref) - tgt_offset(t).
  const synthetic::LayeredScene scene{.width = 16, .height = 16, .frames = 16, .fg_x0 = 5, .fg_y0 = 4, .fg_size = 5};
  // Scaled tracks give fractional flows so bilinear weights are exercised.
  Tensor all = scene.all_tracks();
  for (float& v : all.data()) v *= 0.73f;
  TripletConfig cfg;
  cfg.crop_fraction = 0.75;
  cfg.augment.noise_max = 0.0f;
  cfg.trajectory.scale = 0.5;
  double worst = 0.0;
  std::size_t mask_mismatch = 0;
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const auto tr = build_triplet(scene.video(), TrackSet(all), cfg, seed);
    const std::size_t ref = tr.reference_index, h = tr.source.height(), w = tr.source.width();
    const auto so = tr.source_trajectory.offsets[ref];
    const Tensor reference = tr.source.frame(ref);
    for (std::size_t t = 0; t < scene.frames; ++t) {
      const auto to = tr.target_trajectory.offsets[t];
      Tensor flow({h, w, 2});
      for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) {
          const std::size_t fy = y + static_cast<std::size_t>(so.y), fx = x + static_cast<std::size_t>(so.x);
          flow.at(y, x, std::size_t{0}) = all.at(ref, t, fy, fx, std::size_t{0}) + static_cast<float>(so.x - to.x);
          flow.at(y, x, std::size_t{1}) = all.at(ref, t, fy, fx, std::size_t{1}) + static_cast<float>(so.y - to.y);
        }
      }
      const auto oracle = testing::naive_scatter(reference, flow, nullptr);
      for (std::size_t p = 0; p < h * w; ++p) {
        const bool valid = static_cast<float>(oracle.coverage[p]) >= cfg.splat.validity_threshold;
        mask_mismatch += valid != (tr.anchor_mask.values()[t * h * w + p] == 1.0f);
        for (std::size_t c = 0; c < 3; ++c) {
          const double expected = valid ? oracle.warped[3 * p + c] : 0.0;
          worst = std::max(worst, std::abs(expected - tr.anchor.frames()[(t * h * w + p) * 3 + c]));
        }
      }
    }
  }
  o.require(worst <= 1e-5 && mask_mismatch == 0, "16x16 anchor vs scatter oracle");
  o.detail << " oracle_max_err=" << worst << " mask_mismatch=" << mask_mismatch;
}

// AC2: identity tracks with equal trajectories reproduce the reference frame.
void ac2(Outcome& o) {
  const synthetic::LayeredScene scene;
  const VideoClip video = scene.video();
  std::size_t failures = 0, frames_checked = 0;
  for (std::size_t ref : {0u, 5u, 15u}) {
    SeededRng rng(ref, 9);
    const Extent crop{40, 36};
    const auto traj = generate_crop_trajectory({{64, 64}, 16, 24.0}, crop, {0.6, 1.5}, rng);
    const VideoClip source = extract_crop_clip(video, traj);
    AnchorAugConfig aug;
    aug.noise_max = 0.0f;
    aug.reference_index = ref;
    const TrackSet tracks(synthetic::identity_tracks(16, 64, 64), ref);
    const auto a = synthesize_anchor_video(source, tracks, traj, traj, aug, SplatParams{}, SeededRng(1));
    failures += a.clip.frame(ref) != source.frame(ref);
    const Tensor mask_ref = a.mask.values().slice(ref);
    failures += !std::all_of(mask_ref.data().begin(), mask_ref.data().end(), [](float v) { return v == 1.0f; });
    ++frames_checked;
  }
  o.require(failures == 0, "V_a[ref] == V_s[ref] and mask all ones");
  o.detail << "references=" << frames_checked << " failures=" << failures;
}

// AC3: 200 random small cases against the scatter oracle; constant-image invariance.
void ac3(Outcome& o) {
  SeededRng rng(2024);
  const SplatParams uniform{};
  const SplatParams map{ImportanceMode::map, 1e-6f, 0.3f};
  double worst = 0.0;
  std::size_t invariance_violations = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t h = 1 + rng.uniform_index(8), w = 1 + rng.uniform_index(8);
    const Tensor frame = testing::random_tensor({h, w, 3}, rng);
    const Tensor flow = testing::random_tensor({h, w, 2}, rng, -3.0, 3.0);
    const Tensor z = testing::random_tensor({h, w, 1}, rng, -2.0, 2.0);
    const bool use_map = trial % 2 == 1;
    const auto r = use_map ? softmax_splat(frame, flow, z, map) : softmax_splat(frame, flow, uniform);
    const auto oracle = testing::naive_scatter(frame, flow, use_map ? &z : nullptr);
    for (std::size_t i = 0; i < frame.size(); ++i) worst = std::max(worst, std::abs(static_cast<double>(r.warped[i] - oracle.warped[i])));
    for (std::size_t i = 0; i < h * w; ++i) worst = std::max(worst, std::abs(static_cast<double>(r.weight[i] - oracle.coverage[i])));

    const Tensor constant({h, w, 3}, 0.37f);
    const auto rc = use_map ? softmax_splat(constant, flow, z, map) : softmax_splat(constant, flow, uniform);
    for (std::size_t i = 0; i < h * w; ++i) {
      if (rc.weight[i] <= uniform.weight_epsilon) continue;
      for (std::size_t c = 0; c < 3; ++c) invariance_violations += rc.warped[3 * i + c] != 0.37f;
    }
  }
  o.require(worst <= 1e-5, "oracle agreement");
  o.require(invariance_violations == 0, "constant-image invariance");
  o.detail << "cases=200 max_err=" << worst << " invariance_violations=" << invariance_violations;
}

// AC4: knot interpolation, natural ends, C2 joins, crop containment fuzz.
void ac4(Outcome& o) {
  SeededRng rng(404);
  double knot_err = 0.0, end_curv = 0.0, join_err = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<ControlPoint> pts(2 + rng.uniform_index(12));
    double t = 0.0;
    for (auto& p : pts) {
      p = {t, rng.uniform(0, 200), rng.uniform(0, 120)};
      t += rng.uniform(0.05, 1.0);
    }
    const auto s = fit_natural_cubic_spline(pts);
    for (const auto& p : pts) {
      const auto v = s.eval(p.t);
      knot_err = std::max({knot_err, std::abs(v[0] - p.x), std::abs(v[1] - p.y)});
    }
    // One-sided second differences of the evaluated curve at both ends.
    const double hd = 1e-3, t0 = s.knots().front(), t1 = s.knots().back();
    for (std::size_t axis = 0; axis < 2; ++axis) {
      const auto f = [&](double x) { return s.eval(x)[axis]; };
      const double c0 = (2 * f(t0) - 5 * f(t0 + hd) + 4 * f(t0 + 2 * hd) - f(t0 + 3 * hd)) / (hd * hd);
      const double c1 = (2 * f(t1) - 5 * f(t1 - hd) + 4 * f(t1 - 2 * hd) - f(t1 - 3 * hd)) / (hd * hd);
      end_curv = std::max({end_curv, std::abs(c0), std::abs(c1)});
    }
    for (std::size_t i = 0; i + 1 < s.segments(); ++i) {
      const double h = s.knots()[i + 1] - s.knots()[i];
      for (const auto& [l, r] : {std::pair{s.x_piece(i), s.x_piece(i + 1)}, std::pair{s.y_piece(i), s.y_piece(i + 1)}}) {
        join_err = std::max({join_err, std::abs(l.value(h) - r.value(0)), std::abs(l.slope(h) - r.slope(0)),
                             std::abs(l.curvature(h) - r.curvature(0))});
      }
    }
  }
  std::size_t violations = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    SeededRng r(seed, 4);
    const std::size_t W = 40 + r.uniform_index(100), H = 40 + r.uniform_index(100);
    const Extent crop{1 + r.uniform_index(W), 1 + r.uniform_index(H)};
    const auto traj = generate_crop_trajectory({{W, H}, 1 + r.uniform_index(60), 24.0}, crop,
                                               {r.uniform(), 0.5 + 3.0 * r.uniform()}, r);
    for (const auto& off : traj.offsets) {
      violations += off.x < 0 || off.y < 0 || off.x + static_cast<long long>(crop.width) > static_cast<long long>(W) ||
                    off.y + static_cast<long long>(crop.height) > static_cast<long long>(H);
    }
  }
  o.require(knot_err <= 1e-5, "knot interpolation");
  o.require(end_curv <= 1e-3, "natural end conditions");
  o.require(join_err <= 1e-4, "C2 continuity");
  o.require(violations == 0, "containment fuzz");
  o.detail << "knot_err=" << knot_err << " end_second_deriv=" << end_curv << " join_err=" << join_err
           << " fuzz_trajectories=100 violations=" << violations;
}

// AC5: render from the source camera and the project/unproject round trip.
void ac5(Outcome& o) {
  const synthetic::PlanarScene scene;
  const auto k = scene.intrinsics();
  std::size_t valid = 0, close = 0;
  const Eigen::Quaterniond tilt(Eigen::AngleAxisd(0.2, Eigen::Vector3d(0.3, 1.0, 0.1).normalized()));
  for (const CameraPose& pose : {CameraPose::identity(), CameraPose{tilt, Eigen::Vector3d(0.2, -0.1, 0.3)}}) {
    for (std::size_t t : {0u, 9u}) {
      const auto view = scene.render(pose, t);
      const auto r = render_pointcloud(unproject_depth(view.frame, view.depth, k, pose), k, pose, {});
      for (std::size_t i = 0; i < scene.width * scene.height; ++i) {
        if (!view.depth.valid(i)) continue;
        ++valid;
        bool ok = r.mask.values()[i] == 1.0f;
        for (std::size_t c = 0; c < 3 && ok; ++c) ok = std::abs(r.frame[3 * i + c] - view.frame[3 * i + c]) <= 2.0f / 255.0f;
        close += ok;
      }
    }
  }
  const double fraction = static_cast<double>(close) / static_cast<double>(valid);

  SeededRng rng(55);
  const CameraIntrinsics kk{100.0, 100.0, 31.5, 23.5, 64, 48};
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    Eigen::Quaterniond qr(rng.normal(), rng.normal(), rng.normal(), rng.normal());
    qr.normalize();
    const CameraPose pose{qr, Eigen::Vector3d(rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-5, 5))};
    const double u = rng.uniform(0, 63), v = rng.uniform(0, 47), d = rng.uniform(0.1, 50.0);
    // Oracle back-projection: pinhole ray scaled to depth, then camera-to-world.
    const Eigen::Vector3d cam((u - kk.cx) / kk.fx * d, (v - kk.cy) / kk.fy * d, d);
    const Eigen::Vector3d world = pose.rotation.toRotationMatrix() * cam + pose.translation;
    double u2 = 0, v2 = 0;
    if (!project(kk, pose.inverse().apply(world), 1e-3, u2, v2)) {
      worst = INFINITY;
      break;
    }
    worst = std::max({worst, std::abs(u2 - u), std::abs(v2 - v)});
  }
  o.require(fraction >= 0.99, "render-from-source >= 99% within 2/255");
  o.require(worst <= 1e-4, "projection round trip");
  o.detail << "valid_pixels=" << valid << " within_2/255=" << fraction << " roundtrip_samples=10000 max_px_err="
           << worst;
}

// AC6: RoPE logits under global temporal shifts; target/source separation.
void ac6(Outcome& o) {
  SeededRng rng(66);
  const RopeConfig cfg{.head_dim = 16, .rope_offset = 50};
  double worst = 0.0;
  for (int trial = 0; trial < 500; ++trial) {
    const Tensor qv = testing::random_tensor({1, 1, 16}, rng, -1, 1);
    const Tensor kv = testing::random_tensor({1, 1, 16}, rng, -1, 1);
    const TokenPosition a{static_cast<long long>(rng.uniform_index(20)), static_cast<long long>(rng.uniform_index(8)),
                          static_cast<long long>(rng.uniform_index(8))};
    const TokenPosition b{static_cast<long long>(rng.uniform_index(20)) + 50,
                          static_cast<long long>(rng.uniform_index(8)), static_cast<long long>(rng.uniform_index(8))};
    const long long shift = static_cast<long long>(rng.uniform_index(2000)) - 1000;
    const auto logit = [&](TokenPosition pa, TokenPosition pb) {
      const Tensor qa = rope_rotate(qv, {pa}, cfg), kb = rope_rotate(kv, {pb}, cfg);
      double s = 0;
      for (std::size_t d = 0; d < 16; ++d) s += static_cast<double>(qa[d]) * kb[d];
      return s;
    };
    worst = std::max(worst, std::abs(logit(a, b) - logit({a.t + shift, a.h, a.w}, {b.t + shift, b.h, b.w})));
  }

  const std::size_t T_L = 20;
  const long long offset = 50;
  SeededRng zr(7);
  const LatentClip z{testing::random_tensor({2, T_L, 2, 2}, zr, -1, 1), 1, 1};
  const auto anchor = assemble_anchor_stream(z, z, BinaryMask::ones(T_L, 2, 2), 1);
  const auto source = assemble_source_stream(z, 1);
  PatchEmbedding embed{testing::random_tensor({5, 4}, zr), Tensor({4})};
  const auto grid = concat_streams(anchor, source, embed, {1, 1, 1}, offset);
  // Oracle: brute force over the position lists.
  long long brute = std::numeric_limits<long long>::max();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (std::size_t j = 0; j < grid.size(); ++j) {
      if (grid.segment[i] == Segment::target && grid.segment[j] == Segment::source) {
        brute = std::min(brute, std::abs(grid.positions[i].t - grid.positions[j].t));
      }
    }
  }
  const long long measured = min_cross_segment_distance(grid);
  o.require(worst <= 1e-4, "shift invariance");
  o.require(measured == brute && measured == offset - static_cast<long long>(T_L - 1), "separation closed form");
  o.require(measured >= 30, "separation of at least 30");
  o.detail << "shift_trials=500 max_logit_diff=" << worst << " min_distance=" << measured
           << " (offset - (T_L-1) = " << offset - static_cast<long long>(T_L - 1) << "; criterion states 30 = offset - T_L"
           << ", checked >= 30)";
}

// AC7: closed-form loss, alpha default, finite differences, 50-step toy-train.
void ac7(Outcome& o) {
  const Tensor t({2, 3}, 0.5f), s({4}, -1.0f);
  const auto l = total_loss(Tensor({2, 3}, 2.5f), t, Tensor({4}, 0.0f), s);
  o.require(l.mse == 4.0 && l.reference == 1.0 && l.total == 4.0 + 0.1 * 1.0, "closed-form 4.1");
  o.require(ToyTrainConfig{}.alpha == 0.1 && PipelineConfig{}.train.alpha == 0.1 && l.alpha == 0.1, "alpha default");

  SeededRng rng(77);
  const ToyConfig small{.model_dim = 16, .heads = 2, .mlp_dim = 16};
  const auto rmat = [&rng](Eigen::Index r, Eigen::Index c, double scale) {
    Mat<double> m(r, c);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = scale * rng.normal();
    return m;
  };
  const std::size_t n = 6;
  ToyBatch<double> b;
  b.inputs = rmat(2 * n, 5, 1.0);
  b.targets = rmat(2 * n, 3, 1.0);
  b.targets.bottomRows(n).array() += 6.0;  // source residuals away from the L1 kink
  for (std::size_t i = 0; i < 2 * n; ++i) {
    b.positions.push_back({static_cast<long long>(i % n / 3) + (i < n ? 0 : 50), static_cast<long long>(i % 3), 0});
    b.segment.push_back(i < n ? Segment::target : Segment::source);
  }
  auto p = init_model_params<double>(small, 5, 3, rng);
  p.block.b1 = rmat(1, 16, 0.3);
  p.block.b2 = rmat(1, 16, 0.3);
  p.bp = rmat(1, 16, 0.3);
  ToyModelParams<double> grad;
  model_loss_and_grad(b, small, p, 0.1, grad);
  std::vector<Mat<double>*> ps;
  std::vector<const Mat<double>*> gs;
  p.for_each([&](const char*, Mat<double>& m) { ps.push_back(&m); });
  grad.for_each([&](const char*, const Mat<double>& m) { gs.push_back(&m); });
  const double h = 1e-3;
  std::size_t checked = 0;
  double worst = 0.0;
  for (std::size_t m = 0; m < ps.size(); ++m) {
    for (int rep = 0; rep < 10; ++rep) {
      const auto idx = static_cast<Eigen::Index>(rng.uniform_index(static_cast<std::uint64_t>(ps[m]->size())));
      const double saved = ps[m]->data()[idx];
      ModelCache<double> c;
      ps[m]->data()[idx] = saved + h;
      const double lp = model_loss(model_forward(b, small, p, c), b, 0.1).total;
      ps[m]->data()[idx] = saved - h;
      const double lm = model_loss(model_forward(b, small, p, c), b, 0.1).total;
      ps[m]->data()[idx] = saved;
      const double numeric = (lp - lm) / (2 * h), analytic = gs[m]->data()[idx];
      worst = std::max(worst, std::abs(numeric - analytic) / std::max({std::abs(numeric), std::abs(analytic), 1e-6}));
      ++checked;
    }
  }
  o.require(checked >= 100 && worst <= 1e-3, "finite-difference gradients");

  const fs::path triplet = g_work / "triplet_a";
  const int rc = fs::exists(triplet) ? run_cli("toy-train --triplet " + q(triplet) + " --steps 50 --seed 3 --out " +
                                                   q(g_work / "toy_train"), "toy_train")
                                     : -1;
  o.require(rc == 0, "toy-train exit status");
  std::vector<double> totals;
  std::ifstream log(g_work / "toy_train" / "loss.txt");
  std::string header;
  std::getline(log, header);
  for (std::string line; std::getline(log, line);) {
    std::istringstream ls(line);
    double step, mse, ref, total, alpha;
    if (ls >> step >> mse >> ref >> total >> alpha) totals.push_back(total);
  }
  const double drop = totals.size() == 50 ? 1.0 - totals.back() / totals.front() : 0.0;
  o.require(totals.size() == 50 && drop >= 0.3, "50-step loss drop >= 30%");
  o.detail << "total=" << l.total << " alpha=" << l.alpha << " fd_params=" << checked << " fd_max_rel_err=" << worst
           << " toy_train_first=" << (totals.empty() ? NAN : totals.front())
           << " last=" << (totals.empty() ? NAN : totals.back()) << " drop=" << drop;
}

// AC8: pose metrics constructions and planted-homography recovery.
void ac8(Outcome& o) {
  SeededRng rng(88);
  const auto random_pose = [&rng](double ts) {
    Eigen::Quaterniond qr(rng.normal(), rng.normal(), rng.normal(), rng.normal());
    qr.normalize();
    return CameraPose{qr, ts * Eigen::Vector3d(rng.normal(), rng.normal(), rng.normal())};
  };
  PoseTrajectory gt{random_pose(1.0)}, gen{gt[0]};
  const Eigen::Quaterniond extra(Eigen::AngleAxisd(std::numbers::pi / 180.0, Eigen::Vector3d::UnitZ()));
  for (int i = 0; i < 10; ++i) {
    const CameraPose step = random_pose(0.3);
    gt.push_back(gt.back().compose(step));
    gen.push_back(gen.back().compose({extra * step.rotation, step.translation}));
  }
  const double identical = std::max({rot_err(gt, gt), trans_err(gt, gt).value,
                                     trans_err(gt, gt, TransErrMode::unnormalized).value});
  const double ten = rot_err(gen, gt);
  PoseTrajectory moving, still(11);
  for (int i = 0; i <= 10; ++i) moving.push_back({Eigen::Quaterniond::Identity(), Eigen::Vector3d(0.1 * i, 0, 0)});
  const double offset = trans_err(moving, still, TransErrMode::unnormalized).value;

  std::size_t planted = 0, recovered = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    SeededRng r(800 + seed);
    Eigen::Matrix3d hm;
    hm << 1.0 + 0.1 * r.normal(), 0.1 * r.normal(), 20 * r.normal(), 0.1 * r.normal(), 1.0 + 0.1 * r.normal(),
        20 * r.normal(), 1e-4 * r.normal(), 1e-4 * r.normal(), 1.0;
    std::vector<Correspondence> m;
    for (int i = 0; i < 80; ++i) {
      const double x = r.uniform(0, 640), y = r.uniform(0, 480);
      const Eigen::Vector3d pt = hm * Eigen::Vector3d(x, y, 1);
      m.push_back({x, y, pt.x() / pt.z() + 0.3 * r.normal(), pt.y() / pt.z() + 0.3 * r.normal(), r.uniform(0.5, 1)});
    }
    for (int i = 0; i < 20; ++i) {
      m.push_back({r.uniform(0, 640), r.uniform(0, 480), r.uniform(0, 640), r.uniform(0, 480), r.uniform(0.5, 1)});
    }
    planted += 80;
    recovered += std::min<std::size_t>(matching_pixels(m, {.seed = seed}).count, 80);
  }
  const double rate = static_cast<double>(recovered) / static_cast<double>(planted);
  o.require(identical <= 1e-9, "identical trajectories give 0");
  o.require(std::abs(ten - 10.0) <= 1e-4, "1 deg x 10 steps");
  o.require(std::abs(offset - 0.1) <= 1e-9, "0.1 offset");
  o.require(rate >= 0.98, "planted inlier recovery");
  o.detail << "identical=" << identical << " rot_err=" << ten << " trans_err_unnorm=" << offset
           << " inlier_recovery=" << rate << " (20 seeds)";
}

// AC9: manifest mixture and evaluation-set size through the CLI.
void ac9(Outcome& o) {
  const fs::path ev = g_work / "fixture" / "eval";
  const int rc1 = run_cli("mix-manifest --real " + q(ev / "real_pool.txt") + " --synthetic " +
                              q(ev / "synthetic_pool.txt") + " --ratio 0.15 --size 100 --out " + q(g_work / "mix"),
                          "mix");
  const std::size_t total = count_lines(g_work / "mix" / "manifest.txt");
  const std::size_t synthetic = count_lines(g_work / "mix" / "manifest.txt", " synthetic ");
  const auto stats = read_stats(ev / "stats.txt");
  std::set<std::string> groups;
  for (const auto& s : stats) groups.insert(s.group_id);
  const int rc2 =
      run_cli("select-eval --stats " + q(ev / "stats.txt") + " --k 10 --out " + q(g_work / "select"), "select");
  const std::size_t selected = count_lines(g_work / "select" / "eval_ids.txt");
  o.require(rc1 == 0 && total == 100 && synthetic == 15, "15 synthetic of 100");
  o.require(rc2 == 0 && groups.size() == 10 && selected == 100, "100 evaluation ids");
  o.detail << "manifest=" << total << " synthetic=" << synthetic << " groups=" << groups.size()
           << " stats=" << stats.size() << " selected=" << selected;
}

// AC10: structured noise no-op, empirical std, clamping.
void ac10(Outcome& o) {
  SeededRng rng(10);
  const Tensor frame = testing::random_tensor({32, 32, 3}, rng);
  SeededRng zero_rng(1);
  const bool noop = inject_structured_noise(frame, zero_rng, 0.0f) == frame;

  double worst_ratio = 0.0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    SeededRng draw(seed, 10);
    const auto noise = sample_structured_noise(256, 256, draw, 0.5f);
    // Reproduce the same draws and recover the noise from a mid-grey frame.
    SeededRng apply(seed, 10);
    const Tensor out = inject_structured_noise(Tensor({256, 256, 3}, 0.5f), apply, 0.5f);
    for (std::size_t c = 0; c < 3; ++c) {
      if (noise.sigma[c] < 0.02f) continue;
      double sum = 0, sq = 0;
      for (std::size_t i = 0; i < 256 * 256; ++i) {
        const double d = noise.noise[3 * i + c];
        sum += d;
        sq += d * d;
        if (out[3 * i + c] != std::clamp(0.5f + noise.noise[3 * i + c], 0.0f, 1.0f)) worst_ratio = INFINITY;
      }
      const double n = 256.0 * 256.0;
      const double sd = std::sqrt(sq / n - (sum / n) * (sum / n));
      worst_ratio = std::max(worst_ratio, std::abs(sd / noise.sigma[c] - 1.0));
    }
  }
  std::size_t out_of_range = 0;
  for (int i = 0; i < 100; ++i) {
    const Tensor f = testing::random_tensor({12, 10, 3}, rng);
    const Tensor noisy = inject_structured_noise(f, rng, 1.0f);
    for (float v : noisy.data()) out_of_range += v < 0.0f || v > 1.0f;
  }
  o.require(noop, "sigma 0 no-op");
  o.require(worst_ratio <= 0.05, "std within 5%");
  o.require(out_of_range == 0, "clamped to [0,1]");
  o.detail << "noop=" << noop << " max_std_rel_err=" << worst_ratio << " fuzz_frames=100 out_of_range=" << out_of_range;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 3) {
    std::cerr << "usage: tforge_acceptance <triplet-forge binary> <work dir>\n";
    return 2;
  }
  g_cli = fs::absolute(argv[1]);
  g_work = fs::absolute(argv[2]);
  fs::remove_all(g_work);
  fs::create_directories(g_work);

  const std::vector<std::pair<const char*, std::function<void(Outcome&)>>> criteria = {
      {"AC1", ac1}, {"AC2", ac2}, {"AC3", ac3}, {"AC4", ac4}, {"AC5", ac5},
      {"AC6", ac6}, {"AC7", ac7}, {"AC8", ac8}, {"AC9", ac9}, {"AC10", ac10},
  };
  int failed = 0;
  for (const auto& [id, fn] : criteria) {
    Outcome o;
    try {
      fn(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << " [exception: " << e.what() << "]";
    }
    failed += !o.pass;
    std::cout << id << ' ' << (o.pass ? "PASS" : "FAIL") << ' ' << o.detail.str() << std::endl;
  }
  std::cout << (criteria.size() - static_cast<std::size_t>(failed)) << '/' << criteria.size() << " criteria passed"
            << std::endl;
  return failed == 0 ? 0 : 1;
}
