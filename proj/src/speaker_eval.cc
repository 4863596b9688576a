// src/speaker_eval.cc

// Copyright 2026  Voiceval Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "voiceval/speaker_eval.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "voiceval/ops.h"
#include "voiceval/parallel.h"

namespace voiceval {

std::vector<Trial> load_trials(const std::string &path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open trials: " + path);
  std::vector<Trial> trials;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ss(line);
    int label;
    Trial t;
    if (!(ss >> label >> t.enroll_utt >> t.test_utt) ||
        (label != 0 && label != 1))
      throw std::runtime_error("trials line " + std::to_string(line_no) +
                               ": expected '<0|1> <enroll> <test>'");
    t.is_target = (label == 1);
    trials.push_back(std::move(t));
  }
  return trials;
}

void save_trials(const std::vector<Trial> &trials, const std::string &path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  for (const Trial &t : trials)
    os << (t.is_target ? 1 : 0) << " " << t.enroll_utt << " " << t.test_utt
       << "\n";
  if (!os) throw std::runtime_error("write failed: " + path);
}

std::vector<ScoredTrial> score_trials(
    const std::vector<FrameEmbeddings> &archive,
    const std::vector<Trial> &trials, int threads) {
  std::unordered_map<std::string, Vector> pooled;
  pooled.reserve(archive.size());
  for (const FrameEmbeddings &fe : archive) pooled[fe.utt_id] = mean_pool(fe);

  auto lookup = [&pooled](const std::string &utt) -> const Vector & {
    auto it = pooled.find(utt);
    if (it == pooled.end())
      throw std::runtime_error("trial references missing utterance '" + utt +
                               "'");
    return it->second;
  };
  // Resolve sequentially so a missing utterance fails deterministically.
  for (const Trial &t : trials) {
    lookup(t.enroll_utt);
    lookup(t.test_utt);
  }

  std::vector<ScoredTrial> scored(trials.size());
  parallel_for(trials.size(), threads, [&](std::size_t i) {
    scored[i].trial = trials[i];
    scored[i].score =
        cosine(lookup(trials[i].enroll_utt), lookup(trials[i].test_utt));
  });
  return scored;
}

EerResult compute_eer(const std::vector<double> &scores,
                      const std::vector<std::uint8_t> &is_target) {
  if (scores.size() != is_target.size())
    throw std::invalid_argument("compute_eer: score/label count mismatch");
  std::vector<double> targets, nontargets;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!std::isfinite(scores[i]))
      throw std::invalid_argument("compute_eer: non-finite score");
    (is_target[i] ? targets : nontargets).push_back(scores[i]);
  }
  if (targets.empty() || nontargets.empty())
    throw std::invalid_argument(
        "compute_eer: need at least one target and one non-target");

  std::sort(targets.begin(), targets.end());
  std::sort(nontargets.begin(), nontargets.end());

  std::vector<double> thresholds = scores;
  std::sort(thresholds.begin(), thresholds.end());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()),
                   thresholds.end());

  double n_t = static_cast<double>(targets.size());
  double n_n = static_cast<double>(nontargets.size());
  auto far_at = [&](double t) {
    // non-targets with score >= t
    std::size_t accepted =
        nontargets.end() -
        std::lower_bound(nontargets.begin(), nontargets.end(), t);
    return static_cast<double>(accepted) / n_n;
  };
  auto frr_at = [&](double t) {
    // targets with score < t
    std::size_t rejected =
        std::lower_bound(targets.begin(), targets.end(), t) - targets.begin();
    return static_cast<double>(rejected) / n_t;
  };

  // Operating points: one per distinct score, plus the all-reject point.
  // The first point is always (FAR 1, FRR 0) and the last (FAR 0, FRR 1);
  // FRR - FAR is non-decreasing along the sweep, so the crossing is unique.
  std::size_t m = thresholds.size();
  std::vector<double> far(m + 1), frr(m + 1), thr(m + 1);
  for (std::size_t k = 0; k < m; ++k) {
    thr[k] = thresholds[k];
    far[k] = far_at(thresholds[k]);
    frr[k] = frr_at(thresholds[k]);
  }
  thr[m] = thresholds[m - 1];
  far[m] = 0.0;
  frr[m] = 1.0;

  std::size_t k = 0;
  while (frr[k] < far[k]) ++k;
  EerResult result;
  if (frr[k] == far[k]) {
    result.eer_percent = 100.0 * far[k];
    result.threshold = thr[k];
    return result;
  }
  // k >= 1 here since frr[0]=0 < far[0]=1. Interpolate within [k-1, k].
  double denom = (frr[k] - frr[k - 1]) - (far[k] - far[k - 1]);
  double alpha = denom != 0.0 ? (far[k - 1] - frr[k - 1]) / denom : 1.0;
  result.eer_percent = 100.0 * (far[k - 1] + alpha * (far[k] - far[k - 1]));
  result.threshold = thr[k - 1] + alpha * (thr[k] - thr[k - 1]);
  return result;
}

std::vector<std::size_t> cluster_embeddings(
    const std::vector<Vector> &embeddings, const ClusteringParams &params) {
  std::size_t n = embeddings.size();
  if (n == 0)
    throw std::invalid_argument("cluster_embeddings: no embeddings");
  if (!(params.stop_threshold > 0.0 && params.stop_threshold < 2.0))
    throw std::invalid_argument(
        "cluster_embeddings: stop_threshold must be in (0, 2)");

  struct Cluster {
    bool active = true;
    std::size_t size = 0;
    std::size_t first_member = 0;
  };
  std::vector<Cluster> clusters(n);
  std::vector<std::size_t> label_of(n);
  std::vector<std::vector<double>> dist(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    clusters[i] = {true, 1, i};
    label_of[i] = i;
    for (std::size_t j = i + 1; j < n; ++j) {
      double d = 1.0 - cosine(embeddings[i], embeddings[j]);
      dist[i][j] = d;
      dist[j][i] = d;
    }
  }

  // Average linkage via the weighted update
  //   d(A+B, C) = (|A| d(A,C) + |B| d(B,C)) / (|A| + |B|)
  auto merge = [&](std::size_t i, std::size_t j) {
    for (std::size_t k = 0; k < n; ++k) {
      if (!clusters[k].active || k == i || k == j) continue;
      double d = (static_cast<double>(clusters[i].size) * dist[i][k] +
                  static_cast<double>(clusters[j].size) * dist[j][k]) /
                 static_cast<double>(clusters[i].size + clusters[j].size);
      dist[i][k] = d;
      dist[k][i] = d;
    }
    clusters[i].size += clusters[j].size;
    clusters[i].first_member = std::min(clusters[i].first_member,
                                        clusters[j].first_member);
    clusters[j].active = false;
    for (std::size_t t = 0; t < n; ++t)
      if (label_of[t] == j) label_of[t] = i;
  };

  while (true) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t bi = n, bj = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (!clusters[i].active) continue;
      for (std::size_t j = i + 1; j < n; ++j) {
        if (!clusters[j].active) continue;
        if (dist[i][j] < best) {
          best = dist[i][j];
          bi = i;
          bj = j;
        }
      }
    }
    if (bi == n || best > params.stop_threshold) break;
    merge(bi, bj);
  }

  // Absorb undersized clusters into the nearest full-size cluster.
  if (params.min_cluster_size > 1) {
    while (true) {
      std::size_t small = n;
      for (std::size_t i = 0; i < n; ++i)
        if (clusters[i].active && clusters[i].size < params.min_cluster_size &&
            (small == n ||
             clusters[i].first_member < clusters[small].first_member))
          small = i;
      if (small == n) break;
      std::size_t best_k = n;
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < n; ++k) {
        if (!clusters[k].active || k == small ||
            clusters[k].size < params.min_cluster_size)
          continue;
        if (dist[small][k] < best_d) {
          best_d = dist[small][k];
          best_k = k;
        }
      }
      if (best_k == n) break;  // nothing reaches full size; leave as-is
      merge(best_k, small);
    }
  }

  // Canonical labels: order clusters by smallest member index.
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < n; ++i)
    if (clusters[i].active) order.push_back(i);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return clusters[a].first_member < clusters[b].first_member;
  });
  std::vector<std::size_t> canonical(n, 0);
  for (std::size_t rank = 0; rank < order.size(); ++rank)
    canonical[order[rank]] = rank;
  std::vector<std::size_t> labels(n);
  for (std::size_t t = 0; t < n; ++t) labels[t] = canonical[label_of[t]];
  return labels;
}

std::vector<DiarSegment> load_rttm(const std::string &path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open rttm: " + path);
  std::vector<DiarSegment> segments;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string type, session, chan, na1, na2, speaker;
    double start, dur;
    if (!(ss >> type >> session >> chan >> start >> dur >> na1 >> na2 >>
          speaker) ||
        type != "SPEAKER")
      throw std::runtime_error("rttm line " + std::to_string(line_no) +
                               ": malformed SPEAKER record");
    DiarSegment seg;
    seg.session_id = session;
    seg.start_s = start;
    seg.end_s = start + dur;
    seg.speaker = speaker;
    segments.push_back(std::move(seg));
  }
  return segments;
}

void save_rttm(const std::vector<DiarSegment> &segments,
               const std::string &path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  char buf[64];
  for (const DiarSegment &seg : segments) {
    std::snprintf(buf, sizeof(buf), "%.3f %.3f", seg.start_s,
                  seg.end_s - seg.start_s);
    os << "SPEAKER " << seg.session_id << " 1 " << buf << " <NA> <NA> "
       << seg.speaker << " <NA> <NA>\n";
  }
  if (!os) throw std::runtime_error("write failed: " + path);
}

std::vector<DiarSegment> diarize(const FrameEmbeddings &session,
                                 double window_s, double hop_s,
                                 const ClusteringParams &params) {
  std::size_t n_frames = session.num_frames();
  if (n_frames == 0) throw std::invalid_argument("diarize: empty session");
  double rate = static_cast<double>(session.frame_rate_hz);
  std::size_t window_frames =
      static_cast<std::size_t>(std::llround(window_s * rate));
  std::size_t hop_frames = static_cast<std::size_t>(std::llround(hop_s * rate));
  if (window_frames < 1)
    throw std::invalid_argument("diarize: window shorter than one frame");
  if (hop_frames < 1)
    throw std::invalid_argument("diarize: hop shorter than one frame");

  std::vector<std::pair<std::size_t, std::size_t>> windows;  // frame ranges
  for (std::size_t start = 0; start < n_frames; start += hop_frames)
    windows.emplace_back(start, std::min(start + window_frames, n_frames));

  std::vector<Vector> pooled;
  pooled.reserve(windows.size());
  for (auto [begin, end] : windows) {
    FrameEmbeddings view;
    view.utt_id = session.utt_id;
    view.frame_rate_hz = session.frame_rate_hz;
    view.frames = Matrix(end - begin, session.dim());
    view.valid.assign(end - begin, 1);
    for (std::size_t t = begin; t < end; ++t) {
      view.valid[t - begin] = session.valid[t];
      const float *src = session.frames.row(t);
      float *dst = view.frames.row(t - begin);
      for (std::size_t d = 0; d < session.dim(); ++d) dst[d] = src[d];
    }
    pooled.push_back(mean_pool(view));
  }

  std::vector<std::size_t> labels = cluster_embeddings(pooled, params);

  // Window i owns [i*hop, (i+1)*hop); the last window owns through the end.
  std::vector<DiarSegment> segments;
  std::size_t i = 0;
  while (i < windows.size()) {
    std::size_t j = i;
    while (j + 1 < windows.size() && labels[j + 1] == labels[i]) ++j;
    DiarSegment seg;
    seg.session_id = session.utt_id;
    seg.speaker = "spk" + std::to_string(labels[i]);
    seg.start_s = static_cast<double>(i * hop_frames) / rate;
    std::size_t end_frame =
        (j + 1 < windows.size()) ? (j + 1) * hop_frames : n_frames;
    seg.end_s = static_cast<double>(end_frame) / rate;
    segments.push_back(std::move(seg));
    i = j + 1;
  }
  return segments;
}

namespace {

// Exact assignment (minimization) via shortest augmenting paths with
// potentials; cost is a square matrix. Returns row -> column.
std::vector<std::size_t> hungarian_min(
    const std::vector<std::vector<double>> &cost) {
  std::size_t n = cost.size();
  const double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, kInf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      std::size_t i0 = p[j0], j1 = 0;
      double delta = kInf;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> row_to_col(n, n);
  for (std::size_t j = 1; j <= n; ++j) row_to_col[p[j] - 1] = j - 1;
  return row_to_col;
}

struct Timeline {
  std::vector<double> points;                  // sorted interval boundaries
  std::vector<std::pair<double, double>> holes;  // collar no-score zones
};

bool in_holes(const Timeline &tl, double t) {
  for (auto [a, b] : tl.holes)
    if (t > a && t < b) return true;
  return false;
}

}  // namespace

DerResult compute_der(const std::vector<DiarSegment> &reference,
                      const std::vector<DiarSegment> &hypothesis,
                      double collar_s) {
  if (reference.empty())
    throw std::invalid_argument("compute_der: empty reference");
  for (const DiarSegment &seg : reference)
    if (!(seg.end_s > seg.start_s))
      throw std::invalid_argument("compute_der: non-positive segment in ref");
  for (const DiarSegment &seg : hypothesis)
    if (!(seg.end_s > seg.start_s))
      throw std::invalid_argument("compute_der: non-positive segment in hyp");
  {
    const std::string &session = reference.front().session_id;
    for (const DiarSegment &seg : reference)
      if (seg.session_id != session)
        throw std::invalid_argument("compute_der: mixed sessions in ref");
    for (const DiarSegment &seg : hypothesis)
      if (seg.session_id != session)
        throw std::invalid_argument("compute_der: ref/hyp session mismatch");
  }

  std::vector<std::string> ref_speakers, hyp_speakers;
  {
    std::set<std::string> r, h;
    for (const DiarSegment &seg : reference) r.insert(seg.speaker);
    for (const DiarSegment &seg : hypothesis) h.insert(seg.speaker);
    ref_speakers.assign(r.begin(), r.end());
    hyp_speakers.assign(h.begin(), h.end());
  }
  auto ref_index = [&](const std::string &s) {
    return std::lower_bound(ref_speakers.begin(), ref_speakers.end(), s) -
           ref_speakers.begin();
  };
  auto hyp_index = [&](const std::string &s) {
    return std::lower_bound(hyp_speakers.begin(), hyp_speakers.end(), s) -
           hyp_speakers.begin();
  };

  Timeline tl;
  for (const DiarSegment &seg : reference) {
    tl.points.push_back(seg.start_s);
    tl.points.push_back(seg.end_s);
    if (collar_s > 0.0) {
      tl.holes.emplace_back(seg.start_s - collar_s, seg.start_s + collar_s);
      tl.holes.emplace_back(seg.end_s - collar_s, seg.end_s + collar_s);
      tl.points.push_back(seg.start_s - collar_s);
      tl.points.push_back(seg.start_s + collar_s);
      tl.points.push_back(seg.end_s - collar_s);
      tl.points.push_back(seg.end_s + collar_s);
    }
  }
  for (const DiarSegment &seg : hypothesis) {
    tl.points.push_back(seg.start_s);
    tl.points.push_back(seg.end_s);
  }
  std::sort(tl.points.begin(), tl.points.end());
  tl.points.erase(std::unique(tl.points.begin(), tl.points.end()),
                  tl.points.end());

  std::size_t n_ref = ref_speakers.size();
  std::size_t n_hyp = hyp_speakers.size();
  std::size_t n_pad = std::max(n_ref, n_hyp);
  std::vector<std::vector<double>> overlap(n_ref,
                                           std::vector<double>(n_hyp, 0.0));

  auto active_sets = [&](double mid, std::vector<char> &ref_on,
                         std::vector<char> &hyp_on) {
    std::fill(ref_on.begin(), ref_on.end(), 0);
    std::fill(hyp_on.begin(), hyp_on.end(), 0);
    for (const DiarSegment &seg : reference)
      if (mid >= seg.start_s && mid < seg.end_s)
        ref_on[ref_index(seg.speaker)] = 1;
    for (const DiarSegment &seg : hypothesis)
      if (mid >= seg.start_s && mid < seg.end_s)
        hyp_on[hyp_index(seg.speaker)] = 1;
  };

  std::vector<char> ref_on(n_ref, 0), hyp_on(n_hyp, 0);

  // Pass 1: co-activity time over scored intervals, for the speaker mapping.
  for (std::size_t k = 0; k + 1 < tl.points.size(); ++k) {
    double a = tl.points[k], b = tl.points[k + 1];
    double mid = 0.5 * (a + b);
    if (in_holes(tl, mid)) continue;
    active_sets(mid, ref_on, hyp_on);
    double dur = b - a;
    for (std::size_t r = 0; r < n_ref; ++r) {
      if (!ref_on[r]) continue;
      for (std::size_t h = 0; h < n_hyp; ++h)
        if (hyp_on[h]) overlap[r][h] += dur;
    }
  }

  // Optimal one-to-one mapping maximizing overlapped time.
  std::vector<std::size_t> ref_to_hyp(n_ref, n_hyp);
  if (n_ref > 0 && n_hyp > 0) {
    std::vector<std::vector<double>> cost(n_pad,
                                          std::vector<double>(n_pad, 0.0));
    for (std::size_t r = 0; r < n_ref; ++r)
      for (std::size_t h = 0; h < n_hyp; ++h) cost[r][h] = -overlap[r][h];
    std::vector<std::size_t> assign = hungarian_min(cost);
    for (std::size_t r = 0; r < n_ref; ++r)
      if (assign[r] < n_hyp) ref_to_hyp[r] = assign[r];
  }

  // Pass 2: per-interval error accounting.
  double ref_time = 0.0, miss = 0.0, fa = 0.0, conf = 0.0;
  for (std::size_t k = 0; k + 1 < tl.points.size(); ++k) {
    double a = tl.points[k], b = tl.points[k + 1];
    double mid = 0.5 * (a + b);
    if (in_holes(tl, mid)) continue;
    active_sets(mid, ref_on, hyp_on);
    double dur = b - a;
    std::size_t nr = 0, nh = 0, correct = 0;
    for (char c : ref_on) nr += (c != 0);
    for (char c : hyp_on) nh += (c != 0);
    if (nr == 0 && nh == 0) continue;
    for (std::size_t r = 0; r < n_ref; ++r)
      if (ref_on[r] && ref_to_hyp[r] < n_hyp && hyp_on[ref_to_hyp[r]])
        ++correct;
    ref_time += dur * static_cast<double>(nr);
    if (nr > nh) miss += dur * static_cast<double>(nr - nh);
    if (nh > nr) fa += dur * static_cast<double>(nh - nr);
    std::size_t matched = std::min(nr, nh);
    conf += dur * static_cast<double>(matched - correct);
  }

  if (ref_time <= 0.0)
    throw std::invalid_argument(
        "compute_der: no scored reference speech (collar removed it all?)");

  DerResult result;
  result.scored_time_s = ref_time;
  result.miss_percent = 100.0 * miss / ref_time;
  result.false_alarm_percent = 100.0 * fa / ref_time;
  result.confusion_percent = 100.0 * conf / ref_time;
  result.der_percent = 100.0 * (miss + fa + conf) / ref_time;
  return result;
}

DerResult compute_der_multi(const std::vector<DiarSegment> &reference,
                            const std::vector<DiarSegment> &hypothesis,
                            double collar_s) {
  std::map<std::string, std::vector<DiarSegment>> ref_by, hyp_by;
  for (const DiarSegment &seg : reference) ref_by[seg.session_id].push_back(seg);
  for (const DiarSegment &seg : hypothesis) hyp_by[seg.session_id].push_back(seg);
  if (ref_by.empty())
    throw std::invalid_argument("compute_der_multi: empty reference");

  double ref_time = 0.0, miss = 0.0, fa = 0.0, conf = 0.0;
  for (const auto &[session, ref_segs] : ref_by) {
    auto it = hyp_by.find(session);
    std::vector<DiarSegment> hyp_segs =
        (it == hyp_by.end()) ? std::vector<DiarSegment>{} : it->second;
    DerResult r = compute_der(ref_segs, hyp_segs, collar_s);
    ref_time += r.scored_time_s;
    miss += r.miss_percent / 100.0 * r.scored_time_s;
    fa += r.false_alarm_percent / 100.0 * r.scored_time_s;
    conf += r.confusion_percent / 100.0 * r.scored_time_s;
  }
  DerResult total;
  total.scored_time_s = ref_time;
  total.miss_percent = 100.0 * miss / ref_time;
  total.false_alarm_percent = 100.0 * fa / ref_time;
  total.confusion_percent = 100.0 * conf / ref_time;
  total.der_percent = 100.0 * (miss + fa + conf) / ref_time;
  return total;
}

std::map<std::string, std::size_t> speaker_counts(
    const std::vector<DiarSegment> &segments) {
  std::map<std::string, std::set<std::string>> by_session;
  for (const DiarSegment &seg : segments)
    by_session[seg.session_id].insert(seg.speaker);
  std::map<std::string, std::size_t> counts;
  for (const auto &[session, speakers] : by_session)
    counts[session] = speakers.size();
  return counts;
}

double counting_mae(const std::map<std::string, std::size_t> &ref_counts,
                    const std::map<std::string, std::size_t> &hyp_counts) {
  if (ref_counts.empty())
    throw std::invalid_argument("counting_mae: no sessions");
  if (ref_counts.size() != hyp_counts.size())
    throw std::invalid_argument("counting_mae: session sets differ");
  double total = 0.0;
  for (const auto &[session, ref_n] : ref_counts) {
    auto it = hyp_counts.find(session);
    if (it == hyp_counts.end())
      throw std::invalid_argument("counting_mae: session '" + session +
                                  "' missing from hypothesis");
    total += std::abs(static_cast<double>(ref_n) -
                      static_cast<double>(it->second));
  }
  return total / static_cast<double>(ref_counts.size());
}

}  // namespace voiceval
