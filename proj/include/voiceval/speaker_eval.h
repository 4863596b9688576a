// voiceval/speaker_eval.h

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

#ifndef VOICEVAL_SPEAKER_EVAL_H_
#define VOICEVAL_SPEAKER_EVAL_H_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "voiceval/embedding.h"
#include "voiceval/types.h"

namespace voiceval {

// One verification trial. Text format, one per line:
//   <0|1> <enroll_utt> <test_utt>
struct Trial {
  std::string enroll_utt;
  std::string test_utt;
  bool is_target = false;
};

std::vector<Trial> load_trials(const std::string &path);
void save_trials(const std::vector<Trial> &trials, const std::string &path);

struct ScoredTrial {
  Trial trial;
  double score = 0.0;
};

// score = cosine(mean_pool(enroll), mean_pool(test)). Errors when a trial
// names an utterance missing from the archive.
std::vector<ScoredTrial> score_trials(
    const std::vector<FrameEmbeddings> &archive,
    const std::vector<Trial> &trials, int threads = 1);

struct EerResult {
  double eer_percent = 0.0;
  double threshold = 0.0;
};

// Threshold convention: FAR(t) = fraction of non-target scores >= t,
// FRR(t) = fraction of target scores < t. Operating points are evaluated at
// every distinct score (plus the all-reject point); the EER is linearly
// interpolated at the FAR/FRR crossing. Errors unless both classes are
// present.
EerResult compute_eer(const std::vector<double> &scores,
                      const std::vector<std::uint8_t> &is_target);

// Agglomerative clustering with average linkage on cosine distance
// (1 - cosine). Merging continues while the closest pair of clusters is at
// distance <= stop_threshold; ties break on the lowest (i, j) index pair.
// Afterwards clusters smaller than min_cluster_size are absorbed into the
// nearest cluster of full size when one exists. Returned labels are
// canonical: numbered by each cluster's smallest member index.
struct ClusteringParams {
  double stop_threshold = 0.5;
  std::size_t min_cluster_size = 1;
};

std::vector<std::size_t> cluster_embeddings(
    const std::vector<Vector> &embeddings, const ClusteringParams &params);

// Timed speaker segment. RTTM line format:
//   SPEAKER <session> 1 <start> <dur> <NA> <NA> <speaker> <NA> <NA>
// with start/dur printed to 3 decimals.
struct DiarSegment {
  std::string session_id;
  double start_s = 0.0;
  double end_s = 0.0;
  std::string speaker;
};

std::vector<DiarSegment> load_rttm(const std::string &path);
void save_rttm(const std::vector<DiarSegment> &segments,
               const std::string &path);

// Sliding-window diarization over an oracle-VAD session: pool each window,
// cluster the window embeddings, then merge consecutive same-cluster windows
// into segments covering the session end to end. Window i owns
// [i*hop, (i+1)*hop) and the last window owns through the session end.
std::vector<DiarSegment> diarize(const FrameEmbeddings &session,
                                 double window_s, double hop_s,
                                 const ClusteringParams &params);

struct DerResult {
  double der_percent = 0.0;
  double miss_percent = 0.0;
  double false_alarm_percent = 0.0;
  double confusion_percent = 0.0;
  double scored_time_s = 0.0;
};

// DER for one session with an exact optimal speaker mapping (Hungarian
// assignment on scored overlap time). A collar of +-collar_s around every
// reference boundary is excluded from scoring. Errors on an empty reference.
DerResult compute_der(const std::vector<DiarSegment> &reference,
                      const std::vector<DiarSegment> &hypothesis,
                      double collar_s = 0.0);

// Groups segments by session, scores each, and aggregates error times over
// the summed reference speech time.
DerResult compute_der_multi(const std::vector<DiarSegment> &reference,
                            const std::vector<DiarSegment> &hypothesis,
                            double collar_s = 0.0);

// Distinct speaker count per session.
std::map<std::string, std::size_t> speaker_counts(
    const std::vector<DiarSegment> &segments);

// Mean |ref - hyp| over sessions; errors when the session sets differ.
double counting_mae(const std::map<std::string, std::size_t> &ref_counts,
                    const std::map<std::string, std::size_t> &hyp_counts);

}  // namespace voiceval

#endif  // VOICEVAL_SPEAKER_EVAL_H_
