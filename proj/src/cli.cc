// Copyright (c) 2026 The cdasr Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cdasr/cli.h"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "cdasr/perturb.h"

namespace cdasr {

namespace {

std::string num(double v, int precision = 4) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", precision, v);
  return buf;
}

std::string short_num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

// Commas would break the CSV layout.
std::string csv_safe(std::string s) {
  std::replace(s.begin(), s.end(), ',', ';');
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t at = s.find(sep, start);
    out.emplace_back(s.substr(start, at == std::string_view::npos ? s.npos : at - start));
    if (at == std::string_view::npos) break;
    start = at + 1;
  }
  return out;
}

// Flags shared by commands that decode audio.
struct RunFlags {
  std::string config_path;
  double alpha = 0.0, tau = 0.0, snr = 0.0, shift = 0.0, segment_s = 0.0, timeout_s = 0.0;
  std::size_t beam = 0, max_tokens = 0;
  std::uint64_t seed = 0;
  std::string strategies, endpoint;
  bool no_context = false;
  std::map<std::string, CLI::Option*> opts;

  void attach(CLI::App* app) {
    opts["config"] = app->add_option("--config", config_path, "run-config file")
                         ->check(CLI::ExistingFile);
    opts["alpha"] = app->add_option("--alpha", alpha, "contrastive strength (0 = baseline)")
                        ->check(CLI::NonNegativeNumber);
    opts["tau"] = app->add_option("--tau", tau, "negative aggregation temperature")
                      ->check(CLI::PositiveNumber);
    opts["beam"] = app->add_option("--beam", beam, "beam width (enables beam search)")
                       ->check(CLI::PositiveNumber);
    opts["max_tokens"] = app->add_option("--max-tokens", max_tokens, "token cap per segment");
    opts["strategies"] = app->add_option(
        "--strategies", strategies, "negatives: all, gaussian, silence, shift or a+b");
    opts["snr"] = app->add_option("--snr", snr, "gaussian-noise SNR in dB");
    opts["shift"] = app->add_option("--shift", shift, "temporal shift in seconds");
    opts["seed"] = app->add_option("--seed", seed, "base seed");
    opts["segment"] = app->add_option("--segment-s", segment_s, "segment length in seconds")
                          ->check(CLI::PositiveNumber);
    opts["endpoint"] = app->add_option("--endpoint", endpoint,
                                       "host:port of a model server (selects remote backend)");
    opts["timeout"] = app->add_option("--timeout", timeout_s, "remote request timeout in s")
                          ->check(CLI::PositiveNumber);
    opts["no_context"] = app->add_flag("--no-context", no_context,
                                       "do not condition on the previous segment");
  }

  bool given(const std::string& name) const { return opts.at(name)->count() > 0; }

  // defaults < file < CD_SEED < flags
  RunConfig resolve() const {
    RunConfig cfg;
    if (given("config")) cfg = load_config(config_path);
    apply_seed_env(cfg);
    if (given("snr")) cfg.snr_db = snr;
    if (given("shift")) cfg.shift_s = shift;
    if (given("strategies")) {
      try {
        cfg.perturbations = PerturbationSet::from_names(strategies, cfg.snr_db, cfg.shift_s).specs();
      } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
      }
    } else if (given("snr") || given("shift")) {
      for (auto& p : cfg.perturbations) {
        if (given("snr")) p.snr_db = snr;
        if (given("shift")) p.shift_s = shift;
      }
    }
    if (given("alpha")) cfg.decode.alpha = alpha;
    if (given("tau")) cfg.decode.tau = tau;
    if (given("beam")) {
      cfg.decode.selection = Selection::kBeam;
      cfg.decode.beam_width = beam;
    }
    if (given("max_tokens")) cfg.decode.max_tokens_per_segment = max_tokens;
    if (given("seed")) cfg.seed = seed;
    if (given("segment")) cfg.segment_s = segment_s;
    if (given("endpoint")) {
      cfg.backend = BackendKind::kRemote;
      cfg.endpoint = endpoint;
    }
    if (given("timeout")) cfg.timeout_s = timeout_s;
    if (no_context) cfg.context.enabled = false;
    cfg.validate();
    return cfg;
  }
};

struct FileInput {
  std::string name;
  Waveform audio;
  std::string reference;
  std::vector<SilenceSpan> spans;
};

SweepRow evaluate_row(const FileInput& in, const TranscriptResult& r) {
  SweepRow row;
  row.file = in.name;
  row.total_tokens = r.total_tokens;
  row.wall_time_s = r.total_wall_time_s;
  row.audio_duration_s = r.audio_duration_s;
  if (!r.complete) {
    row.status = "incomplete: " + r.error;
    return row;
  }
  const auto rep = evaluate(in.reference, r.full_text,
                            std::span<const SilenceSpan>(in.spans), in.audio.duration_s());
  row.wer = rep.wer;
  row.substitutions = rep.substitutions;
  row.deletions = rep.deletions;
  row.insertions = rep.insertions;
  row.ref_words = rep.ref_word_count;
  row.longest_repeat_run = rep.longest_repeat_run;
  row.silence_insertions = rep.silence_insertions;
  return row;
}

SweepRow aggregate(const std::vector<SweepRow>& per_file) {
  SweepRow agg;
  agg.file = "ALL";
  std::size_t failed = 0;
  bool all_spans = true;
  std::size_t si = 0;
  for (const auto& r : per_file) {
    if (r.status != "ok") {
      ++failed;
      continue;
    }
    agg.substitutions += r.substitutions;
    agg.deletions += r.deletions;
    agg.insertions += r.insertions;
    agg.ref_words += r.ref_words;
    agg.total_tokens += r.total_tokens;
    agg.longest_repeat_run = std::max(agg.longest_repeat_run, r.longest_repeat_run);
    agg.wall_time_s += r.wall_time_s;
    agg.audio_duration_s += r.audio_duration_s;
    if (r.silence_insertions) {
      si += *r.silence_insertions;
    } else {
      all_spans = false;
    }
  }
  if (all_spans && failed < per_file.size()) agg.silence_insertions = si;
  if (agg.ref_words > 0) {
    agg.wer = 100.0 * static_cast<double>(agg.substitutions + agg.deletions + agg.insertions) /
              static_cast<double>(agg.ref_words);
  }
  if (failed == per_file.size()) {
    agg.status = "failed";
  } else if (failed > 0) {
    agg.status = "partial: " + std::to_string(failed) + " file(s) failed";
  }
  return agg;
}

void write_json(std::ostream& out, const nlohmann::json& j) { out << j.dump(2) << "\n"; }

int cmd_transcribe(const RunFlags& flags, const std::string& audio_path,
                   const std::string& out_path, std::string timing_path, std::ostream& out,
                   std::ostream& err) {
  const RunConfig cfg = flags.resolve();
  const Waveform audio = load_waveform(audio_path);
  auto backend = cfg.make_backend();
  const TranscriptResult result = run_transcribe(cfg, audio, *backend);
  if (out_path.empty()) {
    write_json(out, to_json(result));
  } else {
    write_text(out_path, to_json(result).dump(2) + "\n");
    if (timing_path.empty()) timing_path = out_path + ".timing.json";
  }
  if (!timing_path.empty()) write_text(timing_path, timing_json(result).dump(2) + "\n");
  if (!result.complete) {
    err << "error: transcription aborted: " << result.error << "\n";
    return kExitFailure;
  }
  return kExitOk;
}

}  // namespace

TranscriptResult run_transcribe(const RunConfig& cfg, const Waveform& audio,
                                Backend& backend) {
  TranscribeOptions opts;
  opts.segment_len_s = cfg.segment_s;
  opts.base_seed = cfg.seed;
  return transcribe(audio, cfg.perturbation_set(), cfg.decode, cfg.context, backend, opts);
}

std::vector<SweepRow> run_sweep(const RunConfig& cfg,
                                const std::vector<ManifestEntry>& manifest,
                                const std::vector<double>& alphas,
                                const std::vector<std::string>& strategy_sets,
                                std::size_t jobs) {
  if (manifest.empty()) throw std::invalid_argument("sweep needs at least one file");
  if (alphas.empty() || strategy_sets.empty()) {
    throw std::invalid_argument("sweep needs at least one alpha and one strategy set");
  }
  struct Run {
    RunConfig cfg;
    std::string run_id;
  };
  std::vector<Run> runs;
  for (const auto& names : strategy_sets) {
    const auto set = PerturbationSet::from_names(names, cfg.snr_db, cfg.shift_s);
    for (double a : alphas) {
      Run r{cfg, ""};
      r.cfg.perturbations = set.specs();
      r.cfg.decode.alpha = a;
      r.cfg.validate();
      r.run_id = set.label() + "@a" + short_num(a);
      runs.push_back(std::move(r));
    }
  }

  // Load failures become per-file rows instead of aborting the sweep.
  std::vector<FileInput> inputs(manifest.size());
  std::vector<std::string> load_errors(manifest.size());
  for (std::size_t i = 0; i < manifest.size(); ++i) {
    inputs[i].name = manifest[i].audio.filename().string();
    try {
      inputs[i].audio = load_waveform(manifest[i].audio);
      std::string ref = read_text(manifest[i].ref);
      while (!ref.empty() && (ref.back() == '\n' || ref.back() == '\r')) ref.pop_back();
      inputs[i].reference = std::move(ref);
      inputs[i].spans = manifest[i].silence_spans;
    } catch (const std::exception& e) {
      load_errors[i] = e.what();
    }
  }

  const std::size_t n_files = manifest.size();
  std::vector<SweepRow> cells(runs.size() * n_files);
  const auto work = [&](std::size_t worker, std::size_t n_workers) {
    std::unique_ptr<Backend> backend;
    std::string backend_error;
    try {
      backend = cfg.make_backend();
    } catch (const std::exception& e) {
      backend_error = e.what();
    }
    for (std::size_t f = worker; f < n_files; f += n_workers) {
      for (std::size_t r = 0; r < runs.size(); ++r) {
        SweepRow row;
        row.file = inputs[f].name;
        if (!load_errors[f].empty()) {
          row.status = "error: " + load_errors[f];
        } else if (!backend) {
          row.status = "error: " + backend_error;
        } else {
          try {
            row = evaluate_row(inputs[f], run_transcribe(runs[r].cfg, inputs[f].audio, *backend));
          } catch (const std::exception& e) {
            row.status = std::string("error: ") + e.what();
          }
        }
        cells[r * n_files + f] = std::move(row);
      }
    }
  };
  const std::size_t n_workers = std::max<std::size_t>(1, std::min(jobs, n_files));
  if (n_workers == 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(work, w, n_workers);
    for (auto& t : pool) t.join();
  }

  std::vector<SweepRow> rows;
  for (std::size_t r = 0; r < runs.size(); ++r) {
    std::vector<SweepRow> per_file(cells.begin() + static_cast<long>(r * n_files),
                                   cells.begin() + static_cast<long>((r + 1) * n_files));
    SweepRow agg = aggregate(per_file);
    for (auto& row : per_file) rows.push_back(std::move(row));
    rows.push_back(std::move(agg));
    for (std::size_t i = rows.size() - n_files - 1; i < rows.size(); ++i) {
      rows[i].run_id = runs[r].run_id;
      rows[i].alpha = runs[r].cfg.decode.alpha;
      rows[i].tau = runs[r].cfg.decode.tau;
      rows[i].strategy_set = runs[r].cfg.perturbation_set().label();
    }
  }
  return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string out =
      "run_id,alpha,tau,strategy_set,file,wer,substitutions,deletions,insertions,ref_words,"
      "longest_repeat_run,silence_insertions,total_tokens,status\n";
  for (const auto& r : rows) {
    out += r.run_id + "," + short_num(r.alpha) + "," + short_num(r.tau) + "," + r.strategy_set +
           "," + csv_safe(r.file) + "," + num(r.wer) + "," + std::to_string(r.substitutions) +
           "," + std::to_string(r.deletions) + "," + std::to_string(r.insertions) + "," +
           std::to_string(r.ref_words) + "," + std::to_string(r.longest_repeat_run) + "," +
           (r.silence_insertions ? std::to_string(*r.silence_insertions) : "") + "," +
           std::to_string(r.total_tokens) + "," + csv_safe(r.status) + "\n";
  }
  return out;
}

std::string sweep_timing_csv(const std::vector<SweepRow>& rows) {
  std::string out = "run_id,file,wall_time_s,tokens_per_s,rtf\n";
  for (const auto& r : rows) {
    const bool ok = r.wall_time_s > 0.0 && r.audio_duration_s > 0.0;
    out += r.run_id + "," + csv_safe(r.file) + "," + num(r.wall_time_s, 6) + "," +
           (ok ? num(static_cast<double>(r.total_tokens) / r.wall_time_s, 3) : "") + "," +
           (ok ? num(r.wall_time_s / r.audio_duration_s, 6) : "") + "\n";
  }
  return out;
}

BenchRow run_bench(const RunConfig& cfg, const Waveform& audio,
                   const std::optional<std::string>& reference, std::size_t repeats,
                   std::string run_id) {
  if (repeats == 0) throw std::invalid_argument("bench needs repeats >= 1");
  auto backend = cfg.make_backend();
  BenchRow row;
  row.run_id = std::move(run_id);
  row.alpha = cfg.decode.alpha;
  row.tau = cfg.decode.tau;
  row.strategy_set = cfg.decode.alpha == 0.0 ? "none" : cfg.perturbation_set().label();

  const auto checked = [&] {
    TranscriptResult r = run_transcribe(cfg, audio, *backend);
    if (!r.complete) throw BackendError(r.error);
    return r;
  };
  (void)checked();  // warmup
  std::vector<double> tps, rtf;
  for (std::size_t i = 0; i < repeats; ++i) {
    row.runs.push_back(checked());
    const Throughput t = throughput(row.runs.back());
    tps.push_back(t.tokens_per_second);
    rtf.push_back(t.rtf);
  }
  row.tokens_per_s = median(tps);
  row.rtf = median(rtf);
  const std::string& hyp = row.runs.back().full_text;
  row.longest_repeat_run = repetition_diagnostics(hyp);
  if (reference) row.wer = word_error_rate(*reference, hyp).wer;
  return row;
}

std::string bench_csv(const std::vector<BenchRow>& rows) {
  std::string out = "run_id,alpha,tau,strategy_set,wer,tokens_per_s,rtf,longest_repeat_run\n";
  for (const auto& r : rows) {
    out += r.run_id + "," + short_num(r.alpha) + "," + short_num(r.tau) + "," + r.strategy_set +
           "," + (r.wer ? num(*r.wer) : "") + "," + num(r.tokens_per_s, 3) + "," +
           num(r.rtf, 6) + "," + std::to_string(r.longest_repeat_run) + "\n";
  }
  return out;
}

PlotData plot_data(std::string_view csv) {
  std::vector<std::string> lines;
  for (auto& l : split(csv, '\n')) {
    if (!l.empty() && l.back() == '\r') l.pop_back();
    if (!l.empty()) lines.push_back(std::move(l));
  }
  if (lines.empty()) throw std::runtime_error("malformed CSV: empty input");
  const auto header = split(lines[0], ',');
  const auto col = [&](const std::string& name) -> std::optional<std::size_t> {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) return std::nullopt;
    return static_cast<std::size_t>(it - header.begin());
  };
  if (lines.size() < 2) throw std::runtime_error("malformed CSV: no data rows");
  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    auto cells = split(lines[i], ',');
    if (cells.size() != header.size()) {
      throw std::runtime_error("malformed CSV: line " + std::to_string(i + 1) + " has " +
                               std::to_string(cells.size()) + " fields, expected " +
                               std::to_string(header.size()));
    }
    rows.push_back(std::move(cells));
  }
  const auto number = [](const std::string& s, std::size_t line) {
    try {
      std::size_t used = 0;
      const double v = std::stod(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw std::runtime_error("malformed CSV: bad number '" + s + "' on line " +
                               std::to_string(line));
    }
  };

  PlotData out;
  const auto file_col = col("file");
  const auto alpha_col = col("alpha");
  const auto wer_col = col("wer");
  if (file_col && alpha_col && wer_col) {
    // Sweep: mean of the corpus-level WERs at each alpha across strategy sets.
    std::map<double, std::pair<double, std::size_t>> by_alpha;
    bool any_aggregate = false;
    for (const auto& r : rows) any_aggregate |= r[*file_col] == "ALL";
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto& r = rows[i];
      if ((r[*file_col] == "ALL") != any_aggregate || r[*wer_col].empty()) continue;
      if (const auto st = col("status"); st && r[*st] != "ok") continue;
      auto& acc = by_alpha[number(r[*alpha_col], i + 2)];
      acc.first += number(r[*wer_col], i + 2);
      ++acc.second;
    }
    if (by_alpha.empty()) throw std::runtime_error("malformed CSV: no usable sweep rows");
    out.tsv = "alpha\tmean_wer\n";
    double max_wer = 0.0;
    std::vector<std::pair<double, double>> pts;
    for (const auto& [a, acc] : by_alpha) {
      const double m = acc.first / static_cast<double>(acc.second);
      out.tsv += short_num(a) + "\t" + num(m) + "\n";
      pts.emplace_back(a, m);
      max_wer = std::max(max_wer, m);
    }
    const double a0 = pts.front().first;
    const double a1 = std::max(pts.back().first, a0 + 1e-9);
    const double top = max_wer > 0.0 ? max_wer : 1.0;
    std::string poly;
    for (const auto& [a, m] : pts) {
      const double x = 40.0 + 340.0 * (a - a0) / (a1 - a0);
      const double y = 260.0 - 220.0 * m / top;
      poly += num(x, 1) + "," + num(y, 1) + " ";
    }
    out.svg =
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"400\" height=\"300\">\n"
        "<text x=\"200\" y=\"20\" text-anchor=\"middle\">WER vs alpha</text>\n"
        "<line x1=\"40\" y1=\"260\" x2=\"380\" y2=\"260\" stroke=\"black\"/>\n"
        "<line x1=\"40\" y1=\"40\" x2=\"40\" y2=\"260\" stroke=\"black\"/>\n"
        "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"2\" points=\"" +
        poly + "\"/>\n</svg>\n";
    return out;
  }

  const auto id_col = col("run_id");
  const auto tps_col = col("tokens_per_s");
  const auto rtf_col = col("rtf");
  if (!id_col || !tps_col || !rtf_col) {
    throw std::runtime_error("malformed CSV: neither sweep nor bench columns");
  }
  out.tsv = "method\ttokens_per_s\trtf\n";
  std::vector<std::pair<std::string, double>> bars;
  double max_tps = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    const double tps = number(r[*tps_col], i + 2);
    const double rtf = number(r[*rtf_col], i + 2);
    out.tsv += r[*id_col] + "\t" + num(tps, 3) + "\t" + num(rtf, 6) + "\n";
    bars.emplace_back(r[*id_col], tps);
    max_tps = std::max(max_tps, tps);
  }
  std::string rects;
  const double w = 340.0 / static_cast<double>(bars.size());
  for (std::size_t i = 0; i < bars.size(); ++i) {
    const double h = max_tps > 0.0 ? 220.0 * bars[i].second / max_tps : 0.0;
    const double x = 40.0 + w * static_cast<double>(i) + 0.1 * w;
    rects += "<rect x=\"" + num(x, 1) + "\" y=\"" + num(260.0 - h, 1) + "\" width=\"" +
             num(0.8 * w, 1) + "\" height=\"" + num(h, 1) + "\" fill=\"steelblue\"/>\n";
    rects += "<text x=\"" + num(x + 0.4 * w, 1) +
             "\" y=\"280\" text-anchor=\"middle\" font-size=\"10\">" + bars[i].first +
             "</text>\n";
  }
  out.svg =
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"400\" height=\"300\">\n"
      "<text x=\"200\" y=\"20\" text-anchor=\"middle\">tokens per second</text>\n"
      "<line x1=\"40\" y1=\"260\" x2=\"380\" y2=\"260\" stroke=\"black\"/>\n" +
      rects + "</svg>\n";
  return out;
}

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Contrastive-decoding speech recognition toolkit"};
  app.require_subcommand(1);

  RunFlags tr_flags, sw_flags, be_flags;

  auto* tr = app.add_subcommand("transcribe", "transcribe one audio file to JSON");
  std::string tr_audio, tr_out, tr_timing;
  tr_flags.attach(tr);
  tr->add_option("audio", tr_audio, "16-bit mono WAV")->required();
  tr->add_option("--out", tr_out, "write JSON here instead of stdout");
  tr->add_option("--timing", tr_timing, "timing sidecar (default <out>.timing.json)");

  auto* sw = app.add_subcommand("sweep", "alpha and strategy ablation over a corpus");
  std::string sw_manifest, sw_out, sw_timing;
  std::vector<double> sw_alphas{0.0, 0.5, 1.0, 1.5, 2.0};
  std::vector<std::string> sw_sets{"all"};
  std::size_t sw_jobs = 1;
  sw_flags.attach(sw);
  sw->add_option("--manifest", sw_manifest, "corpus manifest JSON")
      ->required()
      ->check(CLI::ExistingFile);
  sw->add_option("--alphas", sw_alphas, "comma-separated alphas")->delimiter(',');
  sw->add_option("--strategy-sets", sw_sets, "comma-separated strategy sets, e.g. silence,all")
      ->delimiter(',');
  sw->add_option("--out", sw_out, "CSV path (default stdout)");
  sw->add_option("--timing", sw_timing, "timing sidecar CSV (default <out>.timing.csv)");
  sw->add_option("--jobs", sw_jobs, "parallel files")->check(CLI::PositiveNumber);

  auto* be = app.add_subcommand("bench", "median throughput over repeated runs");
  std::string be_audio, be_ref, be_out;
  std::size_t be_repeats = 3;
  bool be_compare = false;
  be_flags.attach(be);
  be->add_option("audio", be_audio, "16-bit mono WAV")->required();
  be->add_option("--repeats", be_repeats, "timed repeats after one warmup run");
  be->add_option("--ref", be_ref, "reference transcript for a WER column")
      ->check(CLI::ExistingFile);
  be->add_flag("--compare-baseline", be_compare, "also emit an alpha = 0 line");
  be->add_option("--out", be_out, "CSV path (default stdout)");

  auto* ev = app.add_subcommand("eval", "score a hypothesis against a reference");
  std::string ev_ref, ev_hyp, ev_spans, ev_timing;
  double ev_duration = 0.0;
  ev->add_option("--ref", ev_ref, "reference text file")->required()->check(CLI::ExistingFile);
  ev->add_option("--hyp", ev_hyp, "hypothesis text file or transcript JSON")
      ->required()
      ->check(CLI::ExistingFile);
  ev->add_option("--spans", ev_spans, "silence span JSON")->check(CLI::ExistingFile);
  ev->add_option("--duration", ev_duration, "audio duration in s (for silence accounting)");
  ev->add_option("--timing", ev_timing, "timing sidecar for throughput fields")
      ->check(CLI::ExistingFile);

  auto* pe = app.add_subcommand("perturb", "write perturbed copies of a WAV");
  std::string pe_audio, pe_dir, pe_strategies = "all";
  double pe_snr = 10.0, pe_shift = 7.0;
  std::uint64_t pe_seed = 0;
  pe->add_option("audio", pe_audio, "16-bit mono WAV")->required();
  pe->add_option("--out-dir", pe_dir, "output directory")->required();
  pe->add_option("--strategies", pe_strategies, "all, gaussian, silence, shift or a+b");
  pe->add_option("--snr", pe_snr, "gaussian-noise SNR in dB");
  pe->add_option("--shift", pe_shift, "temporal shift in seconds");
  auto* pe_seed_opt = pe->add_option("--seed", pe_seed, "noise seed");

  auto* sy = app.add_subcommand("synth", "generate a synthetic toy corpus");
  CorpusSpec sy_spec;
  std::string sy_dir;
  sy->add_option("--out-dir", sy_dir, "output directory")->required();
  sy->add_option("--files", sy_spec.n_files, "number of files");
  sy->add_option("--duration", sy_spec.duration_s, "seconds per file");
  sy->add_option("--silence-fraction", sy_spec.silence_fraction, "share of silent frames")
      ->check(CLI::Range(0.0, 1.0));
  sy->add_option("--silence-blocks", sy_spec.silence_blocks, "max silence blocks per file");
  auto* sy_seed_opt = sy->add_option("--seed", sy_spec.seed, "corpus seed");

  auto* pl = app.add_subcommand("plot", "plot data from sweep or bench CSV");
  std::string pl_csv, pl_tsv, pl_svg;
  pl->add_option("csv", pl_csv, "sweep or bench CSV")->required()->check(CLI::ExistingFile);
  pl->add_option("--tsv", pl_tsv, "TSV path (default stdout)");
  pl->add_option("--svg", pl_svg, "SVG path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (tr->parsed()) return cmd_transcribe(tr_flags, tr_audio, tr_out, tr_timing, out, err);

    if (sw->parsed()) {
      const RunConfig cfg = sw_flags.resolve();
      const auto rows = run_sweep(cfg, load_manifest(sw_manifest), sw_alphas, sw_sets, sw_jobs);
      std::size_t failures = 0;
      for (const auto& r : rows) {
        if (r.file != "ALL" && r.status != "ok") {
          ++failures;
          err << "warning: " << r.run_id << " " << r.file << ": " << r.status << "\n";
        }
      }
      if (sw_out.empty()) {
        out << sweep_csv(rows);
      } else {
        write_text(sw_out, sweep_csv(rows));
        if (sw_timing.empty()) sw_timing = sw_out + ".timing.csv";
      }
      if (!sw_timing.empty()) write_text(sw_timing, sweep_timing_csv(rows));
      if (failures > 0) err << failures << " file run(s) failed\n";
      return kExitOk;
    }

    if (be->parsed()) {
      if (be_repeats == 0) {
        err << "error: --repeats must be at least 1\n";
        return kExitUsage;
      }
      const RunConfig cfg = be_flags.resolve();
      const Waveform audio = load_waveform(be_audio);
      std::optional<std::string> ref;
      if (!be_ref.empty()) ref = read_text(be_ref);
      std::vector<BenchRow> rows;
      rows.push_back(run_bench(cfg, audio, ref, be_repeats, cfg.decode.alpha == 0.0 ? "baseline" : "cd"));
      if (be_compare && cfg.decode.alpha != 0.0) {
        RunConfig base = cfg;
        base.decode.alpha = 0.0;
        rows.push_back(run_bench(base, audio, ref, be_repeats, "baseline"));
      }
      if (be_out.empty()) {
        out << bench_csv(rows);
      } else {
        write_text(be_out, bench_csv(rows));
      }
      return kExitOk;
    }

    if (ev->parsed()) {
      const std::string ref = read_text(ev_ref);
      std::string hyp = read_text(ev_hyp);
      double duration = ev_duration;
      if (std::filesystem::path(ev_hyp).extension() == ".json") {
        const auto j = nlohmann::json::parse(hyp);
        hyp = j.at("full_text").get<std::string>();
        if (duration <= 0.0 && j.contains("audio_duration_s")) {
          duration = j["audio_duration_s"].get<double>();
        }
      }
      std::optional<std::vector<SilenceSpan>> spans;
      if (!ev_spans.empty()) spans = parse_spans(nlohmann::json::parse(read_text(ev_spans)));
      if (spans && duration <= 0.0) {
        err << "error: silence accounting needs --duration or a transcript JSON\n";
        return kExitUsage;
      }
      EvalReport rep =
          spans ? evaluate(ref, hyp, std::span<const SilenceSpan>(*spans), duration)
                : evaluate(ref, hyp, std::nullopt, duration);
      if (!ev_timing.empty()) {
        const auto t = nlohmann::json::parse(read_text(ev_timing));
        const Throughput tp = throughput(t.at("total_tokens").get<std::size_t>(),
                                         t.at("total_wall_time_s").get<double>(),
                                         t.at("audio_duration_s").get<double>());
        rep.tokens_per_second = tp.tokens_per_second;
        rep.rtf = tp.rtf;
      }
      write_json(out, to_json(rep));
      return kExitOk;
    }

    if (pe->parsed()) {
      RunConfig seed_cfg;
      apply_seed_env(seed_cfg);
      const std::uint64_t seed = pe_seed_opt->count() ? pe_seed : seed_cfg.seed;
      const Waveform audio = load_waveform(pe_audio);
      const auto set = PerturbationSet::from_names(pe_strategies, pe_snr, pe_shift, seed);
      std::filesystem::create_directories(pe_dir);
      const std::string stem = std::filesystem::path(pe_audio).stem().string();
      const auto outputs = apply_set(audio, set);
      for (std::size_t k = 0; k < set.size(); ++k) {
        const auto path = std::filesystem::path(pe_dir) /
                          (stem + "." + std::string(to_string(set[k].kind)) + ".wav");
        save_waveform(path, outputs[k]);
        out << path.string() << "\n";
      }
      return kExitOk;
    }

    if (sy->parsed()) {
      if (!sy_seed_opt->count()) {
        RunConfig seed_cfg;
        seed_cfg.seed = sy_spec.seed;
        apply_seed_env(seed_cfg);
        sy_spec.seed = seed_cfg.seed;
      }
      const auto manifest = generate(sy_spec, sy_dir);
      out << (std::filesystem::path(sy_dir) / "manifest.json").string() << "\n";
      return manifest.size() == sy_spec.n_files ? kExitOk : kExitFailure;
    }

    if (pl->parsed()) {
      const PlotData data = plot_data(read_text(pl_csv));
      if (pl_tsv.empty()) {
        out << data.tsv;
      } else {
        write_text(pl_tsv, data.tsv);
      }
      if (!pl_svg.empty()) write_text(pl_svg, data.svg);
      return kExitOk;
    }
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}

int run_cli(int argc, char** argv) { return run_cli(argc, argv, std::cout, std::cerr); }

}  // namespace cdasr
