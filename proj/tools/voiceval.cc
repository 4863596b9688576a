// tools/voiceval.cc

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

// Batch evaluation/training tool over embedding archives. One binary with
// subcommands; every artifact is a pure function of the inputs and --seed,
// so identical invocations produce byte-identical outputs.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "voiceval/align.h"
#include "voiceval/archive.h"
#include "voiceval/captions.h"
#include "voiceval/manifest.h"
#include "voiceval/multitask.h"
#include "voiceval/ops.h"
#include "voiceval/probe.h"
#include "voiceval/report.h"
#include "voiceval/rng.h"
#include "voiceval/speaker_eval.h"
#include "voiceval/synth.h"

namespace vv = voiceval;
using nlohmann::json;

namespace {

std::string format_double(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  return std::string(buf);
}

// Records every option value of the executed subcommand so reports carry
// their full configuration.
json config_json(const CLI::App *cmd) {
  json cfg = json::object();
  for (const CLI::Option *opt : cmd->get_options()) {
    std::string name = opt->get_name();
    if (name.empty() || name == "--help") continue;
    if (opt->count() > 0) {
      const auto &results = opt->results();
      if (results.size() == 1) {
        cfg[name] = results[0];
      } else {
        cfg[name] = results;
      }
    } else {
      cfg[name] = opt->get_default_str();
    }
  }
  return cfg;
}

void write_json_file(const json &obj, const std::string &path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  os << obj.dump(2) << "\n";
  if (!os) throw std::runtime_error("write failed: " + path);
}

void write_text_file(const std::string &text, const std::string &path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  os << text;
  if (!os) throw std::runtime_error("write failed: " + path);
}

std::vector<vv::FrameEmbeddings> load_maybe_encoded(
    const std::string &archive_path, const std::string &encoder_path) {
  std::vector<vv::FrameEmbeddings> archive = vv::read_archive(archive_path);
  if (encoder_path.empty()) return archive;
  vv::ToyEncoder enc = vv::load_encoder(encoder_path);
  return vv::encode_archive(archive, enc);
}

std::unordered_map<std::string, vv::Vector> pool_map(
    const std::vector<vv::FrameEmbeddings> &archive) {
  std::unordered_map<std::string, vv::Vector> pooled;
  for (const vv::FrameEmbeddings &fe : archive)
    pooled[fe.utt_id] = vv::mean_pool(fe);
  return pooled;
}

// Paired voice/caption sets in caption-file order.
struct PairedData {
  std::vector<vv::Vector> voice;
  std::vector<std::vector<std::string>> captions;
  std::vector<std::string> utt_ids;
};

PairedData pair_captions(const std::vector<vv::FrameEmbeddings> &archive,
                         const std::vector<vv::CaptionRecord> &captions) {
  auto pooled = pool_map(archive);
  PairedData data;
  for (const vv::CaptionRecord &cap : captions) {
    auto it = pooled.find(cap.utt_id);
    if (it == pooled.end())
      throw std::runtime_error("caption " + cap.caption_id +
                               " references missing utterance " + cap.utt_id);
    data.voice.push_back(it->second);
    data.captions.push_back(cap.tokens);
    data.utt_ids.push_back(cap.utt_id);
  }
  return data;
}

std::string trace_csv(const std::vector<double> &losses, const char *index) {
  std::string out = std::string(index) + ",loss\n";
  for (std::size_t i = 0; i < losses.size(); ++i)
    out += std::to_string(i) + "," + format_double(losses[i], 9) + "\n";
  return out;
}

int run_synth_gen(const CLI::App *cmd, std::uint64_t seed,
                  std::size_t n_speakers, std::size_t utts, std::size_t dim,
                  std::size_t frames, double frame_rate, double speaker_scale,
                  double attr_scale, double noise_sigma,
                  std::size_t emotion_classes, std::size_t diar_sessions,
                  std::size_t diar_speakers, std::size_t diar_segments,
                  double seg_min, double seg_max, const std::string &out_dir) {
  vv::SynthConfig cfg;
  cfg.seed = seed;
  cfg.n_speakers = n_speakers;
  cfg.utts_per_speaker = utts;
  cfg.dim = dim;
  cfg.frames_per_utt = frames;
  cfg.frame_rate_hz = static_cast<float>(frame_rate);
  cfg.speaker_scale = static_cast<float>(speaker_scale);
  cfg.noise_sigma = static_cast<float>(noise_sigma);
  cfg.emotion_classes = emotion_classes;
  vv::default_attribute_offsets(cfg, static_cast<float>(attr_scale));

  std::filesystem::create_directories(out_dir);
  vv::SynthCorpus corpus = vv::generate_corpus(cfg);
  vv::write_archive(corpus.embeddings, out_dir + "/embeddings.audv",
                    static_cast<std::uint32_t>(cfg.dim), cfg.frame_rate_hz);
  vv::save_manifest(corpus.manifest, out_dir + "/manifest.jsonl");
  vv::save_trials(corpus.trials, out_dir + "/trials.txt");
  vv::save_captions(corpus.captions, out_dir + "/captions.jsonl");
  vv::save_templates(vv::make_prompt_templates(cfg, vv::Task::kAge),
                     out_dir + "/templates_age.json");
  vv::save_templates(vv::make_prompt_templates(cfg, vv::Task::kGender),
                     out_dir + "/templates_gender.json");
  vv::save_templates(vv::make_prompt_templates(cfg, vv::Task::kEmotion),
                     out_dir + "/templates_emotion.json");
  if (diar_sessions > 0) {
    vv::DiarSessionSet set = vv::generate_diar_sessions(
        cfg, diar_sessions, diar_speakers, diar_segments, seg_min, seg_max);
    vv::write_archive(set.sessions, out_dir + "/diar_sessions.audv",
                      static_cast<std::uint32_t>(cfg.dim), cfg.frame_rate_hz);
    vv::save_rttm(set.reference, out_dir + "/reference.rttm");
  }
  json report;
  report["command"] = "synth gen";
  report["config"] = config_json(cmd);
  report["utterances"] = corpus.embeddings.size();
  report["trials"] = corpus.trials.size();
  write_json_file(report, out_dir + "/synth.json");
  std::cout << "wrote corpus (" << corpus.embeddings.size()
            << " utterances) to " << out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"voice-representation evaluation and training harness"};
  app.require_subcommand(1);
  app.set_config("--config")->description("key=value option file");

  // ---- synth gen ----
  auto *synth = app.add_subcommand("synth", "synthetic corpus generation");
  synth->require_subcommand(1);
  auto *synth_gen = synth->add_subcommand("gen", "generate a seeded corpus");
  struct {
    std::uint64_t seed = 0;
    std::size_t n_speakers = 8;
    std::size_t utts = 10;
    std::size_t dim = 16;
    std::size_t frames = 20;
    double frame_rate = 25.0;
    double speaker_scale = 1.0;
    double attr_scale = 0.5;
    double noise_sigma = 0.05;
    std::size_t emotion_classes = 6;
    std::size_t diar_sessions = 0;
    std::size_t diar_speakers = 2;
    std::size_t diar_segments = 6;
    double seg_min = 2.0;
    double seg_max = 2.0;
    std::string out_dir;
  } sg;
  synth_gen->add_option("--seed", sg.seed, "corpus seed")->capture_default_str();
  synth_gen->add_option("--n-speakers", sg.n_speakers, "speaker count")
      ->capture_default_str();
  synth_gen->add_option("--utts-per-speaker", sg.utts, "utterances per speaker")
      ->capture_default_str();
  synth_gen->add_option("--dim", sg.dim, "embedding dim")->capture_default_str();
  synth_gen->add_option("--frames-per-utt", sg.frames, "frames per utterance")
      ->capture_default_str();
  synth_gen->add_option("--frame-rate", sg.frame_rate, "frames per second")
      ->capture_default_str();
  synth_gen
      ->add_option("--speaker-scale", sg.speaker_scale,
                   "speaker centroid scale")
      ->capture_default_str();
  synth_gen
      ->add_option("--attr-scale", sg.attr_scale,
                   "attribute offset norm (age/gender/emotion)")
      ->capture_default_str();
  synth_gen->add_option("--noise-sigma", sg.noise_sigma, "per-frame noise")
      ->capture_default_str();
  synth_gen
      ->add_option("--emotion-classes", sg.emotion_classes,
                   "emotion label count (synthN set)")
      ->capture_default_str();
  synth_gen
      ->add_option("--diar-sessions", sg.diar_sessions,
                   "also emit this many diarization sessions")
      ->capture_default_str();
  synth_gen
      ->add_option("--diar-speakers", sg.diar_speakers,
                   "speakers per diarization session")
      ->capture_default_str();
  synth_gen
      ->add_option("--diar-segments", sg.diar_segments,
                   "segments per diarization session")
      ->capture_default_str();
  synth_gen->add_option("--seg-min", sg.seg_min, "min segment seconds")
      ->capture_default_str();
  synth_gen->add_option("--seg-max", sg.seg_max, "max segment seconds")
      ->capture_default_str();
  synth_gen->add_option("-o,--out", sg.out_dir, "output directory")
      ->required();

  // ---- pool ----
  auto *pool = app.add_subcommand("pool", "mean-pool an archive to one frame");
  struct {
    std::string archive, encoder, out;
  } pl;
  pool->add_option("--archive", pl.archive, "input archive")->required();
  pool->add_option("--encoder", pl.encoder,
                   "encode with this checkpoint before pooling");
  pool->add_option("-o,--out", pl.out, "output archive")->required();

  // ---- probe ----
  auto *probe = app.add_subcommand("probe", "linear probing");
  probe->require_subcommand(1);
  auto *probe_tr = probe->add_subcommand("train", "train a probe head");
  struct {
    std::string archive, manifest, encoder, out, trace;
    std::string task = "gender";
    std::size_t epochs = 50;
    double lr = 1e-3;
    std::size_t batch = 32;
    std::uint64_t seed = 0;
  } pt;
  probe_tr->add_option("--archive", pt.archive, "embedding archive")->required();
  probe_tr->add_option("--manifest", pt.manifest, "utterance manifest")
      ->required();
  probe_tr->add_option("--task", pt.task, "sid|age|gender|emotion")
      ->capture_default_str();
  probe_tr->add_option("--encoder", pt.encoder, "encode archive first");
  probe_tr->add_option("--epochs", pt.epochs, "training epochs")
      ->capture_default_str();
  probe_tr->add_option("--lr", pt.lr, "Adam learning rate")
      ->capture_default_str();
  probe_tr->add_option("--batch-size", pt.batch, "batch size")
      ->capture_default_str();
  probe_tr->add_option("--seed", pt.seed, "shuffle seed")->capture_default_str();
  probe_tr->add_option("-o,--out", pt.out, "head checkpoint path")->required();
  probe_tr->add_option("--trace", pt.trace, "per-epoch loss CSV");

  auto *probe_ev = probe->add_subcommand("eval", "evaluate a probe head");
  struct {
    std::string archive, manifest, head, encoder, json_out;
    int threads = 1;
  } pe;
  probe_ev->add_option("--archive", pe.archive, "embedding archive")->required();
  probe_ev->add_option("--manifest", pe.manifest, "utterance manifest")
      ->required();
  probe_ev->add_option("--head", pe.head, "head checkpoint")->required();
  probe_ev->add_option("--encoder", pe.encoder, "encode archive first");
  probe_ev->add_option("--threads", pe.threads, "worker threads")
      ->capture_default_str();
  probe_ev->add_option("--json", pe.json_out, "write result JSON here");

  // ---- sv ----
  auto *sv = app.add_subcommand("sv", "speaker verification");
  sv->require_subcommand(1);
  auto *sv_score = sv->add_subcommand("score", "cosine-score trials");
  struct {
    std::string archive, trials, encoder, out;
    int threads = 1;
  } ss;
  sv_score->add_option("--archive", ss.archive, "embedding archive")
      ->required();
  sv_score->add_option("--trials", ss.trials, "trials file")->required();
  sv_score->add_option("--encoder", ss.encoder, "encode archive first");
  sv_score->add_option("--threads", ss.threads, "worker threads")
      ->capture_default_str();
  sv_score->add_option("-o,--out", ss.out, "scores output")->required();

  auto *sv_eer = sv->add_subcommand("eer", "EER from a scores file");
  struct {
    std::string scores, json_out;
  } se;
  sv_eer->add_option("--scores", se.scores, "scores file from 'sv score'")
      ->required();
  sv_eer->add_option("--json", se.json_out, "write result JSON here");

  // ---- diarize ----
  auto *diar = app.add_subcommand("diarize", "sliding-window diarization");
  diar->require_subcommand(1);
  auto *diar_run = diar->add_subcommand("run", "diarize sessions");
  struct {
    std::string sessions, encoder, out;
    double window = 1.0, hop = 1.0, threshold = 0.5;
    std::size_t min_cluster = 1;
  } dr;
  diar_run->add_option("--sessions", dr.sessions, "session archive")
      ->required();
  diar_run->add_option("--encoder", dr.encoder, "encode sessions first");
  diar_run->add_option("--window", dr.window, "window seconds")
      ->capture_default_str();
  diar_run->add_option("--hop", dr.hop, "hop seconds")->capture_default_str();
  diar_run
      ->add_option("--threshold", dr.threshold,
                   "clustering stop threshold (cosine distance)")
      ->capture_default_str();
  diar_run->add_option("--min-cluster-size", dr.min_cluster,
                       "absorb smaller clusters")
      ->capture_default_str();
  diar_run->add_option("-o,--out", dr.out, "hypothesis RTTM")->required();

  auto *diar_score = diar->add_subcommand("score", "DER against a reference");
  struct {
    std::string ref, hyp, json_out;
    double collar = 0.0;
  } ds;
  diar_score->add_option("--ref", ds.ref, "reference RTTM")->required();
  diar_score->add_option("--hyp", ds.hyp, "hypothesis RTTM")->required();
  diar_score->add_option("--collar", ds.collar, "collar seconds")
      ->capture_default_str();
  diar_score->add_option("--json", ds.json_out, "write result JSON here");

  auto *diar_count = diar->add_subcommand("count", "speaker-count MAE");
  struct {
    std::string ref, hyp, json_out;
  } dc;
  diar_count->add_option("--ref", dc.ref, "reference RTTM")->required();
  diar_count->add_option("--hyp", dc.hyp, "hypothesis RTTM")->required();
  diar_count->add_option("--json", dc.json_out, "write result JSON here");

  // ---- clap ----
  auto *clap = app.add_subcommand("clap", "contrastive voice-text alignment");
  clap->require_subcommand(1);
  auto *clap_tr = clap->add_subcommand("train", "train projection heads");
  struct {
    std::string archive, captions, encoder, out_dir;
    std::size_t proj_dim = 16, text_dim = 16, epochs = 200, batch = 64;
    double lr = 1e-2;
    std::uint64_t seed = 0;
  } ct;
  clap_tr->add_option("--archive", ct.archive, "embedding archive")->required();
  clap_tr->add_option("--captions", ct.captions, "caption JSON-lines")
      ->required();
  clap_tr->add_option("--encoder", ct.encoder, "encode archive first");
  clap_tr->add_option("--proj-dim", ct.proj_dim, "shared space dim")
      ->capture_default_str();
  clap_tr->add_option("--text-dim", ct.text_dim, "token vector dim")
      ->capture_default_str();
  clap_tr->add_option("--epochs", ct.epochs, "training epochs")
      ->capture_default_str();
  clap_tr->add_option("--lr", ct.lr, "Adam learning rate")
      ->capture_default_str();
  clap_tr->add_option("--batch-size", ct.batch, "batch size")
      ->capture_default_str();
  clap_tr->add_option("--seed", ct.seed, "init/shuffle seed")
      ->capture_default_str();
  clap_tr->add_option("-o,--out", ct.out_dir, "output directory")->required();

  // ---- retrieval eval ----
  auto *retr = app.add_subcommand("retrieval", "cross-modal retrieval");
  retr->require_subcommand(1);
  auto *retr_ev = retr->add_subcommand("eval", "recall@k over seeded subsets");
  struct {
    std::string archive, captions, model, encoder, json_out;
    std::vector<std::size_t> ks = {1, 5, 10};
    std::size_t subset = 568, n_subsets = 5;
    std::uint64_t seed = 0;
    int threads = 1;
    bool raw_voice = false;
  } re;
  retr_ev->add_option("--archive", re.archive, "embedding archive")->required();
  retr_ev->add_option("--captions", re.captions, "caption JSON-lines")
      ->required();
  retr_ev->add_option("--model", re.model, "clap checkpoint")->required();
  retr_ev->add_option("--encoder", re.encoder, "encode archive first");
  retr_ev->add_option("--ks", re.ks, "recall cutoffs")
      ->delimiter(',')
      ->capture_default_str();
  retr_ev->add_option("--subset-size", re.subset, "pairs per subset")
      ->capture_default_str();
  retr_ev->add_option("--n-subsets", re.n_subsets, "number of subsets")
      ->capture_default_str();
  retr_ev->add_option("--seed", re.seed, "subset sampling seed")
      ->capture_default_str();
  retr_ev->add_option("--threads", re.threads, "worker threads")
      ->capture_default_str();
  retr_ev->add_flag("--raw-voice", re.raw_voice,
                    "compare raw pooled voice instead of projected");
  retr_ev->add_option("--json", re.json_out, "write result JSON here");

  // ---- zsc eval ----
  auto *zsc = app.add_subcommand("zsc", "zero-shot classification");
  zsc->require_subcommand(1);
  auto *zsc_ev = zsc->add_subcommand("eval", "prompt-ensemble classification");
  struct {
    std::string archive, manifest, model, templates, encoder, json_out;
    std::string task = "gender";
    int threads = 1;
  } ze;
  zsc_ev->add_option("--archive", ze.archive, "embedding archive")->required();
  zsc_ev->add_option("--manifest", ze.manifest, "utterance manifest")
      ->required();
  zsc_ev->add_option("--model", ze.model, "clap checkpoint")->required();
  zsc_ev->add_option("--templates", ze.templates, "templates JSON")->required();
  zsc_ev->add_option("--task", ze.task, "age|gender|emotion")
      ->capture_default_str();
  zsc_ev->add_option("--encoder", ze.encoder, "encode archive first");
  zsc_ev->add_option("--threads", ze.threads, "worker threads")
      ->capture_default_str();
  zsc_ev->add_option("--json", ze.json_out, "write result JSON here");

  // ---- multitask train ----
  auto *mt = app.add_subcommand("multitask", "joint encoder training");
  mt->require_subcommand(1);
  auto *mt_tr = mt->add_subcommand("train", "train encoder and task heads");
  struct {
    std::string archive, manifest, out_dir;
    std::vector<std::string> tasks = {"sid", "age", "gender", "emotion"};
    std::size_t hidden = 64, out_dim = 0, downsample = 1, epochs = 50,
                batch = 32;
    double lr = 3e-3;
    std::uint64_t seed = 0;
    bool pseudo = false;
    double pseudo_threshold = 0.9;
    std::size_t pseudo_refresh = 1;
  } mtc;
  mt_tr->add_option("--archive", mtc.archive, "embedding archive")->required();
  mt_tr->add_option("--manifest", mtc.manifest, "utterance manifest")
      ->required();
  mt_tr->add_option("--tasks", mtc.tasks, "active tasks")
      ->delimiter(',')
      ->capture_default_str();
  mt_tr->add_option("--hidden", mtc.hidden, "hidden width")
      ->capture_default_str();
  mt_tr->add_option("--out-dim", mtc.out_dim, "output dim (0 = input dim)")
      ->capture_default_str();
  mt_tr->add_option("--downsample", mtc.downsample, "frame group size")
      ->capture_default_str();
  mt_tr->add_option("--epochs", mtc.epochs, "training epochs")
      ->capture_default_str();
  mt_tr->add_option("--lr", mtc.lr, "Adam learning rate")
      ->capture_default_str();
  mt_tr->add_option("--batch-size", mtc.batch, "batch size")
      ->capture_default_str();
  mt_tr->add_option("--seed", mtc.seed, "init/shuffle seed")
      ->capture_default_str();
  mt_tr->add_flag("--pseudo", mtc.pseudo, "fill missing labels with pseudo labels");
  mt_tr
      ->add_option("--pseudo-threshold", mtc.pseudo_threshold,
                   "pseudo-label confidence threshold")
      ->capture_default_str();
  mt_tr
      ->add_option("--pseudo-refresh", mtc.pseudo_refresh,
                   "refresh pseudo labels every N epochs")
      ->capture_default_str();
  mt_tr->add_option("-o,--out", mtc.out_dir, "output directory")->required();

  // ---- adaptor run ----
  auto *adap = app.add_subcommand("adaptor", "LLM-bridge adaptor");
  adap->require_subcommand(1);
  auto *adap_run = adap->add_subcommand("run", "downsample and project frames");
  struct {
    std::string archive, encoder, adaptor_ckpt, save_adaptor, out;
    std::size_t llm_dim = 32, hidden = 64;
    std::uint64_t seed = 0;
    bool average = false;
  } ar;
  adap_run->add_option("--archive", ar.archive, "embedding archive")
      ->required();
  adap_run->add_option("--encoder", ar.encoder, "encode archive first");
  adap_run->add_option("--adaptor", ar.adaptor_ckpt,
                       "adaptor checkpoint (otherwise seeded init)");
  adap_run->add_option("--llm-dim", ar.llm_dim, "output token dim")
      ->capture_default_str();
  adap_run->add_option("--hidden", ar.hidden, "hidden width")
      ->capture_default_str();
  adap_run->add_option("--seed", ar.seed, "init seed when no checkpoint")
      ->capture_default_str();
  adap_run->add_flag("--average", ar.average,
                     "average frame groups instead of stacking");
  adap_run->add_option("--save-adaptor", ar.save_adaptor,
                       "write the adaptor used here");
  adap_run->add_option("-o,--out", ar.out, "output token archive")->required();

  // ---- report ----
  auto *report = app.add_subcommand("report", "aggregate scoring");
  report->require_subcommand(1);
  auto *rep_lp = report->add_subcommand("lp-avg", "row means of a table");
  struct {
    std::string table, json_out;
  } rl;
  rep_lp->add_option("--table", rl.table, "CSV table")->required();
  rep_lp->add_option("--json", rl.json_out, "write result JSON here");

  auto *rep_zs = report->add_subcommand(
      "zs-avg", "negative mean of min-max normalized lower-better metrics");
  struct {
    std::string table, json_out;
  } rz;
  rep_zs->add_option("--table", rz.table, "CSV table (lower-better columns)")
      ->required();
  rep_zs->add_option("--json", rz.json_out, "write result JSON here");

  auto *rep_render = report->add_subcommand("render", "markdown + JSON report");
  struct {
    std::vector<std::string> tables;
    std::string out_dir;
  } rr;
  rep_render->add_option("--tables", rr.tables, "CSV tables")
      ->delimiter(',')
      ->required();
  rep_render->add_option("-o,--out", rr.out_dir, "output directory")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    app.exit(e);
    return 2;  // usage error
  }

  try {
    if (synth_gen->parsed()) {
      return run_synth_gen(synth_gen, sg.seed, sg.n_speakers, sg.utts, sg.dim,
                           sg.frames, sg.frame_rate, sg.speaker_scale,
                           sg.attr_scale, sg.noise_sigma, sg.emotion_classes,
                           sg.diar_sessions, sg.diar_speakers, sg.diar_segments,
                           sg.seg_min, sg.seg_max, sg.out_dir);
    }

    if (pool->parsed()) {
      auto archive = load_maybe_encoded(pl.archive, pl.encoder);
      std::vector<vv::FrameEmbeddings> pooled;
      for (const vv::FrameEmbeddings &fe : archive) {
        vv::Vector v = vv::mean_pool(fe);
        vv::Matrix m(1, v.dim());
        for (std::size_t d = 0; d < v.dim(); ++d) m.at(0, d) = v[d];
        pooled.push_back(vv::make_frame_embeddings(fe.utt_id, std::move(m),
                                                   fe.frame_rate_hz));
      }
      if (pooled.empty())
        throw std::runtime_error("pool: empty archive");
      vv::write_archive(pooled, pl.out);
      std::cout << "pooled " << pooled.size() << " utterances\n";
      return 0;
    }

    if (probe_tr->parsed()) {
      auto archive = load_maybe_encoded(pt.archive, pt.encoder);
      auto manifest = vv::load_manifest(pt.manifest);
      vv::ProbeTrainConfig cfg;
      cfg.epochs = pt.epochs;
      cfg.lr = static_cast<float>(pt.lr);
      cfg.batch_size = pt.batch;
      cfg.seed = pt.seed;
      vv::ProbeTrainResult result =
          vv::probe_train(archive, manifest, vv::parse_task(pt.task), cfg);
      vv::save_probe_head(result.head, result.classes, pt.out);
      if (!pt.trace.empty())
        write_text_file(trace_csv(result.epoch_loss, "epoch"), pt.trace);
      std::cout << "trained " << pt.task << " head ("
                << result.classes.size() << " classes), final loss "
                << format_double(result.epoch_loss.back(), 6) << "\n";
      return 0;
    }

    if (probe_ev->parsed()) {
      auto archive = load_maybe_encoded(pe.archive, pe.encoder);
      auto manifest = vv::load_manifest(pe.manifest);
      vv::LoadedProbeHead loaded = vv::load_probe_head(pe.head);
      double acc = vv::probe_eval(archive, manifest, loaded.head,
                                  loaded.classes, pe.threads);
      std::cout << "accuracy " << format_double(acc, 1) << "\n";
      if (!pe.json_out.empty()) {
        json out;
        out["command"] = "probe eval";
        out["config"] = config_json(probe_ev);
        out["accuracy_percent"] = acc;
        write_json_file(out, pe.json_out);
      }
      return 0;
    }

    if (sv_score->parsed()) {
      auto archive = load_maybe_encoded(ss.archive, ss.encoder);
      auto trials = vv::load_trials(ss.trials);
      auto scored = vv::score_trials(archive, trials, ss.threads);
      std::string text;
      for (const vv::ScoredTrial &st : scored)
        text += std::string(st.trial.is_target ? "1" : "0") + " " +
                st.trial.enroll_utt + " " + st.trial.test_utt + " " +
                format_double(st.score, 6) + "\n";
      write_text_file(text, ss.out);
      std::cout << "scored " << scored.size() << " trials\n";
      return 0;
    }

    if (sv_eer->parsed()) {
      std::ifstream is(se.scores);
      if (!is) throw std::runtime_error("cannot open scores: " + se.scores);
      std::vector<double> scores;
      std::vector<std::uint8_t> labels;
      std::string line;
      while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream lss(line);
        int label;
        std::string enroll, test;
        double score;
        if (!(lss >> label >> enroll >> test >> score))
          throw std::runtime_error("malformed scores line: " + line);
        labels.push_back(label != 0);
        scores.push_back(score);
      }
      vv::EerResult eer = vv::compute_eer(scores, labels);
      std::cout << "eer " << format_double(eer.eer_percent, 4)
                << " threshold " << format_double(eer.threshold, 6) << "\n";
      if (!se.json_out.empty()) {
        json out;
        out["command"] = "sv eer";
        out["config"] = config_json(sv_eer);
        out["eer_percent"] = eer.eer_percent;
        out["threshold"] = eer.threshold;
        write_json_file(out, se.json_out);
      }
      return 0;
    }

    if (diar_run->parsed()) {
      auto sessions = load_maybe_encoded(dr.sessions, dr.encoder);
      vv::ClusteringParams params;
      params.stop_threshold = dr.threshold;
      params.min_cluster_size = dr.min_cluster;
      std::vector<vv::DiarSegment> hyp;
      for (const vv::FrameEmbeddings &session : sessions) {
        std::vector<vv::DiarSegment> segs =
            vv::diarize(session, dr.window, dr.hop, params);
        hyp.insert(hyp.end(), segs.begin(), segs.end());
      }
      vv::save_rttm(hyp, dr.out);
      std::cout << "diarized " << sessions.size() << " sessions, "
                << hyp.size() << " segments\n";
      return 0;
    }

    if (diar_score->parsed()) {
      auto ref = vv::load_rttm(ds.ref);
      auto hyp = vv::load_rttm(ds.hyp);
      vv::DerResult der = vv::compute_der_multi(ref, hyp, ds.collar);
      std::cout << "der " << format_double(der.der_percent, 2) << " miss "
                << format_double(der.miss_percent, 2) << " falarm "
                << format_double(der.false_alarm_percent, 2) << " confusion "
                << format_double(der.confusion_percent, 2) << "\n";
      if (!ds.json_out.empty()) {
        json out;
        out["command"] = "diarize score";
        out["config"] = config_json(diar_score);
        out["der_percent"] = der.der_percent;
        out["miss_percent"] = der.miss_percent;
        out["false_alarm_percent"] = der.false_alarm_percent;
        out["confusion_percent"] = der.confusion_percent;
        out["scored_time_s"] = der.scored_time_s;
        write_json_file(out, ds.json_out);
      }
      return 0;
    }

    if (diar_count->parsed()) {
      auto ref = vv::speaker_counts(vv::load_rttm(dc.ref));
      auto hyp = vv::speaker_counts(vv::load_rttm(dc.hyp));
      double mae = vv::counting_mae(ref, hyp);
      std::cout << "counting-mae " << format_double(mae, 4) << "\n";
      if (!dc.json_out.empty()) {
        json out;
        out["command"] = "diarize count";
        out["config"] = config_json(diar_count);
        out["mae"] = mae;
        json sessions = json::object();
        for (const auto &[session, n] : ref) {
          sessions[session] = {{"ref", n}, {"hyp", hyp.at(session)}};
        }
        out["sessions"] = sessions;
        write_json_file(out, dc.json_out);
      }
      return 0;
    }

    if (clap_tr->parsed()) {
      auto archive = load_maybe_encoded(ct.archive, ct.encoder);
      auto captions = vv::load_captions(ct.captions);
      PairedData data = pair_captions(archive, captions);
      vv::ClapTrainConfig cfg;
      cfg.epochs = ct.epochs;
      cfg.lr = static_cast<float>(ct.lr);
      cfg.batch_size = ct.batch;
      cfg.seed = ct.seed;
      cfg.proj_dim = ct.proj_dim;
      cfg.text_dim = ct.text_dim;
      vv::ClapTrainResult result = vv::clap_train(data.voice, data.captions, cfg);
      std::filesystem::create_directories(ct.out_dir);
      vv::save_clap_model(result.model, ct.out_dir + "/clap.audh");
      write_text_file(trace_csv(result.step_loss, "step"),
                      ct.out_dir + "/trace.csv");
      json report_out;
      report_out["command"] = "clap train";
      report_out["config"] = config_json(clap_tr);
      report_out["pairs"] = data.voice.size();
      report_out["final_loss"] = result.step_loss.back();
      write_json_file(report_out, ct.out_dir + "/clap.json");
      std::cout << "trained clap on " << data.voice.size()
                << " pairs, final loss "
                << format_double(result.step_loss.back(), 6) << "\n";
      return 0;
    }

    if (retr_ev->parsed()) {
      auto archive = load_maybe_encoded(re.archive, re.encoder);
      auto captions = vv::load_captions(re.captions);
      PairedData data = pair_captions(archive, captions);
      vv::ClapModel model = vv::load_clap_model(re.model);
      std::vector<vv::Vector> voice, text;
      for (std::size_t i = 0; i < data.voice.size(); ++i) {
        voice.push_back(re.raw_voice
                            ? data.voice[i]
                            : vv::clap_project_voice(model, data.voice[i]));
        text.push_back(
            vv::toy_text_encode(model.text_encoder, data.captions[i]));
      }
      vv::RetrievalConfig cfg;
      cfg.ks = re.ks;
      cfg.subset_size = re.subset;
      cfg.n_subsets = re.n_subsets;
      cfg.seed = re.seed;
      cfg.threads = re.threads;
      vv::RetrievalResult result = vv::retrieval_eval(voice, text, cfg);
      for (std::size_t k : cfg.ks)
        std::cout << "speech-to-text R@" << k << " "
                  << format_double(result.speech_to_text.at(k), 2) << "\n";
      for (std::size_t k : cfg.ks)
        std::cout << "text-to-speech R@" << k << " "
                  << format_double(result.text_to_speech.at(k), 2) << "\n";
      if (!re.json_out.empty()) {
        json out;
        out["command"] = "retrieval eval";
        out["config"] = config_json(retr_ev);
        json st = json::object(), ts = json::object();
        for (std::size_t k : cfg.ks) {
          st[std::to_string(k)] = result.speech_to_text.at(k);
          ts[std::to_string(k)] = result.text_to_speech.at(k);
        }
        out["speech_to_text"] = st;
        out["text_to_speech"] = ts;
        out["subset_size"] = result.effective_subset_size;
        write_json_file(out, re.json_out);
      }
      return 0;
    }

    if (zsc_ev->parsed()) {
      auto archive = load_maybe_encoded(ze.archive, ze.encoder);
      auto manifest = vv::load_manifest(ze.manifest);
      vv::ClapModel model = vv::load_clap_model(ze.model);
      vv::TemplateSet templates = vv::load_templates(ze.templates);
      vv::Task task = vv::parse_task(ze.task);
      std::map<std::string, vv::Vector> class_emb =
          vv::prompt_ensemble(model.text_encoder, templates);
      std::vector<std::string> classes;
      std::vector<vv::Vector> embeddings;
      for (const auto &[cls, emb] : class_emb) {
        classes.push_back(cls);
        embeddings.push_back(emb);
      }
      std::unordered_map<std::string, const vv::UtteranceRecord *> by_id;
      for (const vv::UtteranceRecord &rec : manifest) by_id[rec.utt_id] = &rec;
      std::size_t n_eval = 0, n_correct = 0;
      for (const vv::FrameEmbeddings &fe : archive) {
        auto it = by_id.find(fe.utt_id);
        if (it == by_id.end()) continue;
        auto label = vv::task_label(*it->second, task);
        if (!label) continue;
        vv::Vector v = vv::clap_project_voice(model, vv::mean_pool(fe));
        std::size_t pred = vv::zsc_classify(v, embeddings);
        ++n_eval;
        if (classes[pred] == *label) ++n_correct;
      }
      if (n_eval == 0) throw std::runtime_error("zsc eval: empty eval set");
      double acc = 100.0 * static_cast<double>(n_correct) /
                   static_cast<double>(n_eval);
      std::cout << "accuracy " << format_double(acc, 1) << "\n";
      if (!ze.json_out.empty()) {
        json out;
        out["command"] = "zsc eval";
        out["config"] = config_json(zsc_ev);
        out["accuracy_percent"] = acc;
        out["evaluated"] = n_eval;
        write_json_file(out, ze.json_out);
      }
      return 0;
    }

    if (mt_tr->parsed()) {
      auto archive = vv::read_archive(mtc.archive);
      auto manifest = vv::load_manifest(mtc.manifest);
      vv::MultitaskTrainConfig cfg;
      for (const std::string &name : mtc.tasks)
        cfg.task_weights[vv::parse_task(name)] = 1.0f;
      cfg.hidden = mtc.hidden;
      cfg.out_dim = mtc.out_dim;
      cfg.downsample = mtc.downsample;
      cfg.epochs = mtc.epochs;
      cfg.lr = static_cast<float>(mtc.lr);
      cfg.batch_size = mtc.batch;
      cfg.seed = mtc.seed;
      cfg.pseudo_labels = mtc.pseudo;
      cfg.pseudo_policy.confidence_threshold = mtc.pseudo_threshold;
      cfg.pseudo_policy.refresh_every_epochs = mtc.pseudo_refresh;
      vv::MultitaskTrainResult result =
          vv::multitask_train(archive, manifest, cfg);

      std::filesystem::create_directories(mtc.out_dir);
      vv::save_encoder(result.encoder, mtc.out_dir + "/encoder.audh");
      vv::save_task_heads(result, mtc.out_dir + "/heads.audh");
      for (const auto &[task, head] : result.heads.heads)
        vv::save_probe_head(head, result.classes.at(task),
                            mtc.out_dir + "/head_" + vv::task_name(task) +
                                ".audh");
      std::string trace = "step,loss";
      for (const auto &[task, head] : result.heads.heads)
        trace += "," + vv::task_name(task);
      trace += "\n";
      for (const vv::TraceRow &row : result.trace) {
        trace += std::to_string(row.step) + "," + format_double(row.loss, 9);
        for (const auto &[task, head] : result.heads.heads) {
          auto it = row.per_task.find(task);
          trace += "," +
                   format_double(it == row.per_task.end() ? 0.0 : it->second, 9);
        }
        trace += "\n";
      }
      write_text_file(trace, mtc.out_dir + "/trace.csv");
      vv::write_archive(vv::encode_archive(archive, result.encoder),
                        mtc.out_dir + "/encoded.audv");
      json out;
      out["command"] = "multitask train";
      out["config"] = config_json(mt_tr);
      out["steps"] = result.trace.size();
      out["final_loss"] = result.trace.back().loss;
      write_json_file(out, mtc.out_dir + "/multitask.json");
      std::cout << "trained encoder for " << result.trace.size()
                << " steps, final loss "
                << format_double(result.trace.back().loss, 6) << "\n";
      return 0;
    }

    if (adap_run->parsed()) {
      auto archive = load_maybe_encoded(ar.archive, ar.encoder);
      if (archive.empty()) throw std::runtime_error("adaptor run: empty archive");
      vv::Adaptor adaptor;
      if (!ar.adaptor_ckpt.empty()) {
        adaptor = vv::load_adaptor(ar.adaptor_ckpt);
      } else {
        std::size_t d = archive[0].dim();
        adaptor.average_groups = ar.average;
        adaptor.group = 4;
        std::size_t in_dim = adaptor.average_groups ? d : 4 * d;
        adaptor.layer1.W = vv::Matrix(in_dim, ar.hidden);
        adaptor.layer1.b = vv::Vector(ar.hidden, 0.0f);
        adaptor.layer2.W = vv::Matrix(ar.hidden, ar.llm_dim);
        adaptor.layer2.b = vv::Vector(ar.llm_dim, 0.0f);
        vv::SplitMix64 rng = vv::derive_stream(ar.seed, 0xADA0);
        auto glorot = [&rng](vv::Matrix &m) {
          double limit =
              std::sqrt(6.0 / static_cast<double>(m.rows + m.cols));
          for (float &x : m.data)
            x = static_cast<float>(rng.uniform_range(-limit, limit));
        };
        glorot(adaptor.layer1.W);
        glorot(adaptor.layer2.W);
      }
      std::vector<vv::FrameEmbeddings> tokens;
      for (const vv::FrameEmbeddings &fe : archive) {
        vv::Matrix out = vv::adaptor_forward(fe, adaptor);
        float rate = fe.frame_rate_hz / static_cast<float>(adaptor.group);
        tokens.push_back(
            vv::make_frame_embeddings(fe.utt_id, std::move(out), rate));
      }
      vv::write_archive(tokens, ar.out);
      if (!ar.save_adaptor.empty()) vv::save_adaptor(adaptor, ar.save_adaptor);
      std::cout << "adapted " << tokens.size() << " utterances to dim "
                << tokens[0].dim() << "\n";
      return 0;
    }

    if (rep_lp->parsed()) {
      vv::MetricTable table = vv::load_table_csv(rl.table);
      json rows = json::object();
      for (std::size_t r = 0; r < table.row_ids.size(); ++r) {
        std::vector<double> values;
        for (std::size_t c = 0; c < table.col_ids.size(); ++c)
          if (table.cell(r, c)) values.push_back(*table.cell(r, c));
        if (values.empty()) {
          std::cout << table.row_ids[r] << " --\n";
          rows[table.row_ids[r]] = nullptr;
        } else {
          double avg = vv::lp_avg(values);
          std::cout << table.row_ids[r] << " " << format_double(avg, 1)
                    << "\n";
          rows[table.row_ids[r]] = avg;
        }
      }
      if (!rl.json_out.empty()) {
        json out;
        out["command"] = "report lp-avg";
        out["config"] = config_json(rep_lp);
        out["rows"] = rows;
        write_json_file(out, rl.json_out);
      }
      return 0;
    }

    if (rep_zs->parsed()) {
      vv::MetricTable table = vv::load_table_csv(rz.table);
      vv::ZsAvgResult result = vv::zs_avg(table);
      for (const std::string &col : result.skipped_columns)
        std::cerr << "zs-avg: column '" << col
                  << "' skipped (constant or underfilled)\n";
      json rows = json::object();
      for (std::size_t r = 0; r < table.row_ids.size(); ++r) {
        if (result.row_scores[r]) {
          std::cout << table.row_ids[r] << " "
                    << format_double(*result.row_scores[r], 1) << "\n";
          rows[table.row_ids[r]] = *result.row_scores[r];
        } else {
          std::cout << table.row_ids[r] << " --\n";
          rows[table.row_ids[r]] = nullptr;
        }
      }
      if (!rz.json_out.empty()) {
        json out;
        out["command"] = "report zs-avg";
        out["config"] = config_json(rep_zs);
        out["rows"] = rows;
        out["skipped_columns"] = result.skipped_columns;
        write_json_file(out, rz.json_out);
      }
      return 0;
    }

    if (rep_render->parsed()) {
      std::vector<vv::MetricTable> tables;
      for (const std::string &path : rr.tables) {
        vv::MetricTable t = vv::load_table_csv(path);
        t.name = std::filesystem::path(path).stem().string();
        tables.push_back(std::move(t));
      }
      json metadata;
      metadata["command"] = "report render";
      metadata["config"] = config_json(rep_render);
      vv::RenderedReport rendered = vv::render_report(tables, metadata);
      std::filesystem::create_directories(rr.out_dir);
      write_text_file(rendered.markdown, rr.out_dir + "/report.md");
      write_json_file(rendered.json, rr.out_dir + "/report.json");
      std::cout << "rendered " << tables.size() << " tables to " << rr.out_dir
                << "\n";
      return 0;
    }
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  std::cerr << "no subcommand executed\n";
  return 2;
}
