#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "gaitref/data.hpp"
#include "gaitref/error.hpp"
#include "gaitref/rng.hpp"

namespace gaitref {

// Procedural 2-D walker, viewed from the side, walking in place (treadmill):
// joint trajectories are sums of sinusoids of the identity's stride period,
// so the clean skeleton is exactly periodic. Units are roughly body heights;
// y is up, the walker faces +x.
struct WalkerIdentity {
  double period;        // stride period in frames
  double thigh_len, shin_len;
  double torso_len;
  double upper_arm_len, forearm_len;
  double hip_half_w, shoulder_half_w;
  double head_rise;     // shoulder->nose vertical offset
  double leg_amp;       // thigh swing amplitude (rad)
  double knee_amp;      // knee flexion amplitude (rad)
  double arm_amp;       // arm swing amplitude (rad)
  double elbow_bend;    // constant elbow flexion (rad)
  double bounce_amp;    // vertical pelvis oscillation
  double lean;          // forward torso lean (rad)
  double base_radius;   // limb capsule radius for rasterization

  static WalkerIdentity from_seed(std::uint64_t identity_seed) {
    Rng rng(mix_seed(identity_seed, 0x1d));
    WalkerIdentity w;
    w.period = rng.uniform(14.0, 22.0);
    const double leg = rng.uniform(0.46, 0.56);
    w.thigh_len = 0.52 * leg;
    w.shin_len = 0.48 * leg;
    w.torso_len = rng.uniform(0.40, 0.50);
    w.upper_arm_len = rng.uniform(0.17, 0.21);
    w.forearm_len = rng.uniform(0.15, 0.19);
    w.hip_half_w = rng.uniform(0.05, 0.08);
    w.shoulder_half_w = rng.uniform(0.07, 0.11);
    w.head_rise = rng.uniform(0.11, 0.15);
    w.leg_amp = rng.uniform(0.40, 0.68);
    w.knee_amp = rng.uniform(0.45, 0.85);
    w.arm_amp = rng.uniform(0.25, 0.55);
    w.elbow_bend = rng.uniform(0.15, 0.50);
    w.bounce_amp = rng.uniform(0.012, 0.032);
    w.lean = rng.uniform(-0.04, 0.09);
    w.base_radius = rng.uniform(0.040, 0.055);
    return w;
  }
};

namespace detail {

struct P2 {
  double x, y;
};

inline double dist_to_segment(double px, double py, P2 a, P2 b) {
  const double vx = b.x - a.x, vy = b.y - a.y;
  const double len2 = vx * vx + vy * vy;
  double t = 0.0;
  if (len2 > 0.0) t = std::clamp(((px - a.x) * vx + (py - a.y) * vy) / len2, 0.0, 1.0);
  const double dx = px - (a.x + t * vx), dy = py - (a.y + t * vy);
  return std::sqrt(dx * dx + dy * dy);
}

struct Capsule {
  P2 a, b;
  double r;
};

}  // namespace detail

// Clean COCO-17 joints for one frame. Joint order: nose, eyes, ears,
// shoulders, elbows, wrists, hips, knees, ankles (left before right).
inline void walker_frame(const WalkerIdentity& w, double phase, double* out_xy /*17*2*/) {
  const double hip_y = w.thigh_len + w.shin_len;
  const double bounce = w.bounce_amp * std::sin(2.0 * phase);
  const double pelvis_y = hip_y + bounce;
  const double shoulder_y = pelvis_y + w.torso_len;
  const double shoulder_x = w.lean * w.torso_len;

  auto leg = [&](double ph, double depth, double* hip, double* knee, double* ankle) {
    const double thigh = w.leg_amp * std::sin(ph);
    // knee flexes most during the swing phase, never hyperextends
    const double bend = w.knee_amp * 0.5 * (1.0 + std::sin(ph + 1.2));
    const double shank = thigh - bend;
    hip[0] = depth;
    hip[1] = pelvis_y;
    knee[0] = hip[0] + w.thigh_len * std::sin(thigh);
    knee[1] = hip[1] - w.thigh_len * std::cos(thigh);
    ankle[0] = knee[0] + w.shin_len * std::sin(shank);
    ankle[1] = knee[1] - w.shin_len * std::cos(shank);
  };
  auto arm = [&](double ph, double depth, double* sh, double* el, double* wr) {
    const double upper = w.arm_amp * std::sin(ph);
    const double fore = upper + w.elbow_bend;
    sh[0] = shoulder_x + depth;
    sh[1] = shoulder_y;
    el[0] = sh[0] + w.upper_arm_len * std::sin(upper);
    el[1] = sh[1] - w.upper_arm_len * std::cos(upper);
    wr[0] = el[0] + w.forearm_len * std::sin(fore);
    wr[1] = el[1] - w.forearm_len * std::cos(fore);
  };

  double lhip[2], lknee[2], lankle[2], rhip[2], rknee[2], rankle[2];
  double lsh[2], lel[2], lwr[2], rsh[2], rel[2], rwr[2];
  leg(phase, w.hip_half_w, lhip, lknee, lankle);
  leg(phase + M_PI, -w.hip_half_w, rhip, rknee, rankle);
  // arms swing against the same-side leg
  arm(phase + M_PI, w.shoulder_half_w, lsh, lel, lwr);
  arm(phase, -w.shoulder_half_w, rsh, rel, rwr);

  const double nose_x = shoulder_x + 0.05;
  const double nose_y = shoulder_y + w.head_rise;
  const double head[5][2] = {{nose_x, nose_y},
                             {nose_x - 0.010, nose_y + 0.022},
                             {nose_x - 0.030, nose_y + 0.022},
                             {nose_x - 0.045, nose_y + 0.004},
                             {nose_x - 0.065, nose_y + 0.004}};

  const double* joints[17] = {head[0], head[1], head[2], head[3], head[4], lsh, rsh, lel, rel,
                              lwr,     rwr,     lhip,    rhip,    lknee,   rknee, lankle, rankle};
  for (int j = 0; j < 17; ++j) {
    out_xy[2 * j] = joints[j][0];
    out_xy[2 * j + 1] = joints[j][1];
  }
}

struct SynthConfig {
  std::int64_t n_frames = 60;
  double jitter_sigma = 0.0;
  double jitter_frame_prob = 0.0;
  double bag_prob = 0.35;  // silhouette-only nuisance
};

namespace detail {

// Everything about one sequence except the rasterized silhouette. Split out
// so skeleton statistics can be sampled without paying for rendering; the
// random streams are identical either way.
struct SynthCore {
  WalkerIdentity w;
  Tensor clean;     // n×17×2, world units
  Tensor jittered;  // n×17×2
  double clothing;
  bool has_bag;
  double bag_r;
};

inline SynthCore synth_core(std::uint64_t identity_seed, const SynthConfig& cfg,
                            std::uint64_t rng_seed) {
  if (cfg.n_frames < 8) throw ConfigError("n_frames must be >= 8");
  if (cfg.jitter_sigma < 0.0) throw ConfigError("jitter_sigma must be >= 0");
  if (cfg.jitter_frame_prob < 0.0 || cfg.jitter_frame_prob > 1.0) {
    throw ConfigError("jitter_frame_prob must be in [0, 1]");
  }
  if (cfg.bag_prob < 0.0 || cfg.bag_prob > 1.0) throw ConfigError("bag_prob must be in [0, 1]");

  SynthCore core;
  core.w = WalkerIdentity::from_seed(identity_seed);
  Rng nuisance(mix_seed(rng_seed, 0x5e));
  const double phase0 = nuisance.uniform(0.0, 2.0 * M_PI);
  core.clothing = nuisance.uniform(0.85, 1.30);
  core.has_bag = nuisance.uniform() < cfg.bag_prob;
  core.bag_r = nuisance.uniform(0.055, 0.095);
  Rng jitter_rng(mix_seed(rng_seed, 0x71));

  const std::int64_t n = cfg.n_frames;
  core.clean = Tensor({n, 17, 2});
  const double omega = 2.0 * M_PI / core.w.period;
  for (std::int64_t f = 0; f < n; ++f) {
    walker_frame(core.w, phase0 + omega * static_cast<double>(f), core.clean.data() + f * 34);
  }

  core.jittered = core.clean;
  for (std::int64_t f = 0; f < n; ++f) {
    if (jitter_rng.uniform() < cfg.jitter_frame_prob) {
      for (std::int64_t i = 0; i < 34; ++i) {
        core.jittered.at(f * 34 + i) += jitter_rng.gaussian(0.0, cfg.jitter_sigma);
      }
    }
  }
  return core;
}

}  // namespace detail

// One sequence: per-identity gait parameters from identity_seed, per-sequence
// nuisances (phase, clothing thickness, bag, jitter) from rng_seed. The
// silhouette is rasterized from the clean skeleton; jitter only perturbs the
// emitted skeleton stream.
inline SampleRecord synth_gait(std::uint64_t identity_seed, const SynthConfig& cfg,
                               std::uint64_t rng_seed) {
  detail::SynthCore core = detail::synth_core(identity_seed, cfg, rng_seed);
  const WalkerIdentity& w = core.w;
  Tensor& clean = core.clean;
  const bool has_bag = core.has_bag;
  const double bag_r = core.bag_r;
  const std::int64_t n = cfg.n_frames;

  // capsule set for one frame of clean joints
  const double R = w.base_radius * core.clothing;
  auto capsules_for = [&](const double* j) {
    auto pt = [&](int idx) { return detail::P2{j[2 * idx], j[2 * idx + 1]}; };
    const detail::P2 hip_mid{0.5 * (j[22] + j[24]), 0.5 * (j[23] + j[25])};
    const detail::P2 sh_mid{0.5 * (j[10] + j[12]), 0.5 * (j[11] + j[13])};
    const detail::P2 head{j[0] - 0.03, j[1] + 0.02};
    std::vector<detail::Capsule> caps;
    caps.push_back({hip_mid, sh_mid, 2.3 * R});                  // torso
    caps.push_back({sh_mid, head, 1.1 * R});                     // neck
    caps.push_back({head, head, 1.75 * R});                      // head
    caps.push_back({pt(11), pt(13), 1.15 * R});                  // thighs
    caps.push_back({pt(12), pt(14), 1.15 * R});
    caps.push_back({pt(13), pt(15), 0.85 * R});                  // shins
    caps.push_back({pt(14), pt(16), 0.85 * R});
    caps.push_back({pt(5), pt(7), 0.80 * R});                    // upper arms
    caps.push_back({pt(6), pt(8), 0.80 * R});
    caps.push_back({pt(7), pt(9), 0.65 * R});                    // forearms
    caps.push_back({pt(8), pt(10), 0.65 * R});
    const detail::P2 la = pt(15), ra = pt(16);
    caps.push_back({la, {la.x + 0.07, la.y - 0.015}, 0.55 * R});  // feet
    caps.push_back({ra, {ra.x + 0.07, ra.y - 0.015}, 0.55 * R});
    if (has_bag) {
      const detail::P2 bag{hip_mid.x - 0.16, hip_mid.y + 0.02};
      caps.push_back({bag, bag, bag_r});
    }
    return caps;
  };

  // one world->image transform per sequence so gait dynamics survive
  double x_lo = 1e30, x_hi = -1e30, y_lo = 1e30, y_hi = -1e30;
  for (std::int64_t f = 0; f < n; ++f) {
    for (const auto& c : capsules_for(clean.data() + f * 34)) {
      x_lo = std::min({x_lo, c.a.x - c.r, c.b.x - c.r});
      x_hi = std::max({x_hi, c.a.x + c.r, c.b.x + c.r});
      y_lo = std::min({y_lo, c.a.y - c.r, c.b.y - c.r});
      y_hi = std::max({y_hi, c.a.y + c.r, c.b.y + c.r});
    }
  }
  const double pad = 2.0;
  const double s = std::min((kSilhouetteHeight - 2.0 * pad) / (y_hi - y_lo),
                            (kSilhouetteWidth - 2.0 * pad) / (x_hi - x_lo));
  const double row0 = 0.5 * (kSilhouetteHeight - s * (y_hi - y_lo));
  const double col0 = 0.5 * (kSilhouetteWidth - s * (x_hi - x_lo));

  SampleRecord rec;
  rec.silhouette.height = kSilhouetteHeight;
  rec.silhouette.width = kSilhouetteWidth;
  rec.silhouette.frames.reserve(static_cast<std::size_t>(n));
  for (std::int64_t f = 0; f < n; ++f) {
    const auto caps = capsules_for(clean.data() + f * 34);
    std::vector<std::uint8_t> frame(
        static_cast<std::size_t>(kSilhouetteHeight * kSilhouetteWidth), 0);
    for (std::int64_t r = 0; r < kSilhouetteHeight; ++r) {
      const double wy = y_hi - (static_cast<double>(r) + 0.5 - row0) / s;
      for (std::int64_t c = 0; c < kSilhouetteWidth; ++c) {
        const double wx = x_lo + (static_cast<double>(c) + 0.5 - col0) / s;
        for (const auto& cap : caps) {
          if (detail::dist_to_segment(wx, wy, cap.a, cap.b) <= cap.r) {
            frame[static_cast<std::size_t>(r * kSilhouetteWidth + c)] = 1;
            break;
          }
        }
      }
    }
    rec.silhouette.frames.push_back(std::move(frame));
  }

  rec.skeleton.joints = std::move(core.jittered);
  rec.skeleton.format = "coco17";
  SkeletonSequence clean_seq;
  clean_seq.joints = std::move(clean);
  clean_seq.format = "coco17";
  rec.clean_skeleton = std::move(clean_seq);
  return rec;
}

}  // namespace gaitref
