#include "ptm/cli.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <ostream>
#include <set>
#include <string>
#include <type_traits>
#include <vector>

#include "ptm/artifacts.hpp"
#include "ptm/corpus.hpp"
#include "ptm/error.hpp"
#include "ptm/metrics.hpp"
#include "ptm/partitioner.hpp"
#include "ptm/sampler.hpp"
#include "ptm/workload.hpp"

namespace ptm {
namespace {

struct UsageError : Error {
  using Error::Error;
};

template <class T>
struct is_vector : std::false_type {};
template <class T>
struct is_vector<std::vector<T>> : std::true_type {};

template <class T>
std::string show(const T& v) {
  if constexpr (std::is_same_v<T, std::string>) {
    return v;
  } else if constexpr (is_vector<T>::value) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + show(v[i]);
    return s;
  } else if constexpr (std::is_floating_point_v<T>) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return {buf, r.ptr};
  } else {
    return std::to_string(v);
  }
}

template <class T>
T parse_value(const std::string& key, const std::string& text) {
  if constexpr (std::is_same_v<T, std::string>) {
    return text;
  } else if constexpr (is_vector<T>::value) {
    T out;
    std::size_t start = 0;
    while (start <= text.size() && !text.empty()) {
      const auto comma = std::min(text.find(',', start), text.size());
      out.push_back(parse_value<typename T::value_type>(key, text.substr(start, comma - start)));
      start = comma + 1;
    }
    return out;
  } else {
    T v{};
    const auto r = std::from_chars(text.data(), text.data() + text.size(), v);
    if (r.ec != std::errc() || r.ptr != text.data() + text.size())
      throw FormatError("manifest value for " + key + " is invalid: " + text);
    return v;
  }
}

/// Options that round-trip through a run manifest.
class Params {
 public:
  template <class T>
  CLI::Option* add(CLI::App& app, const std::string& flag, const std::string& key, T& field,
                   const std::string& help) {
    auto* opt = app.add_option(flag, field, help);
    if constexpr (is_vector<T>::value) opt->delimiter(',');
    params_.push_back({key, opt, [&field, key](const std::string& s) { field = parse_value<T>(key, s); },
                       [&field] { return show(field); }});
    return opt;
  }

  void record(Manifest& m) const {
    for (const auto& p : params_) m.set(p.key, p.get());
  }

  /// Applies manifest values to every option not given on the command line.
  std::set<std::string> fill_from(const Manifest& m) const {
    std::set<std::string> filled;
    for (const auto& p : params_) {
      if (p.option->count() > 0) continue;
      if (auto v = m.get(p.key)) {
        p.set(*v);
        filled.insert(p.key);
      }
    }
    return filled;
  }

 private:
  struct Param {
    std::string key;
    CLI::Option* option;
    std::function<void(const std::string&)> set;
    std::function<std::string()> get;
  };
  std::vector<Param> params_;
};

Manifest read_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open manifest " + path);
  return Manifest::read(in, path);
}

void expect_command(const Manifest& m, const std::string& path, const std::string& command) {
  if (m.get("command") != command) throw FormatError(path + ": not a " + command + " manifest");
}

/// Fails when a manifest-supplied input file no longer matches its digest.
void check_digest(const Manifest& m, const std::set<std::string>& filled, const std::string& key,
                  const std::string& path) {
  if (!filled.count(key) || path.empty()) return;
  const auto want = m.get(key + "_digest");
  if (want && *want != file_digest(path)) throw Error(path + " differs from the file recorded in the manifest");
}

std::optional<std::uint32_t> env_threads() {
  const char* v = std::getenv(kThreadsEnv);
  if (v == nullptr || *v == '\0') return std::nullopt;
  const std::string text(v);
  std::uint32_t n = 0;
  const auto r = std::from_chars(text.data(), text.data() + text.size(), n);
  if (r.ec != std::errc() || r.ptr != text.data() + text.size() || n == 0)
    throw UsageError(std::string(kThreadsEnv) + " must be a positive integer, got '" + text + "'");
  return n;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out.exceptions(std::ios::badbit);
  return out;
}

void set_digest(Manifest& m, const std::string& key, const std::string& path) {
  if (!path.empty()) m.set(key + "_digest", file_digest(path));
}

/// Runs a loader, prefixing any error with the file it was reading.
template <class F>
auto with_path(const std::string& path, F&& load) {
  try {
    return load();
  } catch (const Error& e) {
    const std::string what = e.what();
    if (what.find(path) != std::string::npos) throw;
    throw Error(path + ": " + what);
  }
}

using Clock = std::chrono::steady_clock;
double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// ---------------------------------------------------------------- partition

struct PartitionArgs {
  std::string data;
  std::vector<std::string> algos{"a3"};
  std::vector<std::uint32_t> parts;
  std::uint32_t repeats = 100;
  std::uint64_t seed = 0;
  std::string out_partition;
  std::string manifest_out;
  std::string from_manifest;
};

void add_partition(CLI::App& app, PartitionArgs& a, Params& params) {
  params.add(app, "--data", "data", a.data, "UCI docword file");
  params.add(app, "--algo", "algo", a.algos, "baseline, a1, a2, a3 or all (comma-separated or repeated)")
      ->check(CLI::IsMember({"baseline", "a1", "a2", "a3", "all"}));
  params.add(app, "--p", "p", a.parts, "part counts, e.g. 1,10,30,60")->check(CLI::PositiveNumber);
  params.add(app, "--repeats", "repeats", a.repeats, "trials for randomized algorithms")->check(CLI::PositiveNumber);
  params.add(app, "--seed", "seed", a.seed, "random seed");
  app.add_option("--out-partition", a.out_partition, "write the group of every document and word");
  app.add_option("--manifest", a.manifest_out, "write a run manifest");
  app.add_option("--from-manifest", a.from_manifest, "take unset options from a manifest");
}

void cmd_partition(PartitionArgs& a, const Params& params, std::ostream& out) {
  if (!a.from_manifest.empty()) {
    const auto m = read_manifest(a.from_manifest);
    expect_command(m, a.from_manifest, "partition");
    check_digest(m, params.fill_from(m), "data", a.data);
  }
  if (a.data.empty()) throw UsageError("--data is required");
  if (a.parts.empty()) a.parts = {env_threads().value_or(1)};

  std::vector<Algorithm> algos;
  for (const auto& name : a.algos) {
    if (name == "all") {
      algos.insert(algos.end(), {Algorithm::baseline, Algorithm::a1, Algorithm::a2, Algorithm::a3});
    } else if (auto alg = parse_algorithm(name)) {
      algos.push_back(*alg);
    } else {
      throw UsageError("unknown algorithm " + name);
    }
  }
  if (!a.out_partition.empty() && algos.size() * a.parts.size() != 1)
    throw UsageError("--out-partition needs exactly one algorithm and one P");

  const auto load_start = Clock::now();
  const auto matrix = build_workload(with_path(a.data, [&] { return load_uci_bow_file(a.data); }));
  const double load_seconds = seconds_since(load_start);

  out << "algorithm,P,eta,predicted_speedup,elapsed_ms\n";
  out << std::setprecision(17);
  double partition_seconds = 0.0;
  for (auto alg : algos) {
    for (auto P : a.parts) {
      const auto start = Clock::now();
      const auto res = partition(matrix, alg, {P, a.repeats, a.seed});
      const double elapsed = seconds_since(start);
      partition_seconds += elapsed;
      out << to_string(alg) << ',' << P << ',' << res.report.eta << ',' << res.report.predicted_speedup << ','
          << elapsed * 1e3 << '\n';
      if (!a.out_partition.empty()) {
        auto f = open_output(a.out_partition);
        write_partition(f, res.partitioning);
      }
    }
  }

  if (!a.manifest_out.empty()) {
    Manifest m;
    m.set("command", "partition");
    m.set("version", kToolkitVersion);
    params.record(m);
    set_digest(m, "data", a.data);
    m.set("load_seconds", show(load_seconds));
    m.set("partition_seconds", show(partition_seconds));
    auto f = open_output(a.manifest_out);
    m.write(f);
  }
}

// -------------------------------------------------------------------- train

struct TrainArgs {
  std::string data;
  std::string vocab;
  std::string timestamps;
  std::string mode = "lda";
  std::uint32_t topics = 256;
  double alpha = 0.5;
  double beta = 0.1;
  double gamma = 0.1;
  std::uint32_t length = 16;
  std::uint32_t iterations = 200;
  std::uint64_t seed = 0;
  std::string algo = "a3";
  std::uint32_t parts = 0;  // 0 runs the sequential sampler
  std::uint32_t repeats = 100;
  std::uint32_t perplexity_every = 1;
  std::string out;
  std::string from_manifest;
};

void add_train(CLI::App& app, TrainArgs& a, Params& params) {
  params.add(app, "--data", "data", a.data, "UCI docword file");
  params.add(app, "--vocab", "vocab", a.vocab, "vocabulary file, one word per line");
  params.add(app, "--timestamps", "timestamps", a.timestamps, "docID<TAB>year file (BoT)");
  params.add(app, "--mode", "mode", a.mode, "lda or bot")->check(CLI::IsMember({"lda", "bot"}));
  params.add(app, "--topics", "topics", a.topics, "number of topics K")->check(CLI::PositiveNumber);
  params.add(app, "--alpha", "alpha", a.alpha, "document-topic prior");
  params.add(app, "--beta", "beta", a.beta, "topic-word prior");
  params.add(app, "--gamma", "gamma", a.gamma, "topic-timestamp prior");
  params.add(app, "--length", "length", a.length, "timestamps per document L")->check(CLI::PositiveNumber);
  params.add(app, "--iterations", "iterations", a.iterations, "Gibbs sweeps");
  params.add(app, "--seed", "seed", a.seed, "random seed");
  params.add(app, "--algo", "algo", a.algo, "partitioning algorithm")
      ->check(CLI::IsMember({"baseline", "a1", "a2", "a3"}));
  params.add(app, "--p", "p", a.parts, "parallel parts P (default from " + std::string(kThreadsEnv) + ")")
      ->check(CLI::PositiveNumber);
  params.add(app, "--repeats", "repeats", a.repeats, "trials for randomized partitioning")
      ->check(CLI::PositiveNumber);
  params.add(app, "--perplexity-every", "perplexity_every", a.perplexity_every, "trace interval, 0 disables");
  app.add_option("--out", a.out, "output directory")->required();
  app.add_option("--from-manifest", a.from_manifest, "take unset options from a manifest");
}

void cmd_train(TrainArgs& a, const Params& params, CLI::App& app, std::ostream& out) {
  std::set<std::string> filled;
  if (!a.from_manifest.empty()) {
    const auto m = read_manifest(a.from_manifest);
    expect_command(m, a.from_manifest, "train");
    filled = params.fill_from(m);
    check_digest(m, filled, "data", a.data);
    check_digest(m, filled, "vocab", a.vocab);
    check_digest(m, filled, "timestamps", a.timestamps);
  }
  if (a.data.empty()) throw UsageError("--data is required");
  const auto mode = parse_mode(a.mode);
  if (!mode) throw UsageError("unknown mode " + a.mode);
  if (*mode == Mode::bot && a.timestamps.empty()) throw UsageError("--mode bot requires --timestamps");
  if (*mode == Mode::lda && !a.timestamps.empty()) throw UsageError("--timestamps is only used with --mode bot");
  const auto algo = parse_algorithm(a.algo);
  if (!algo) throw UsageError("unknown algorithm " + a.algo);
  if (app.get_option("--p")->count() == 0 && !filled.count("p")) a.parts = env_threads().value_or(0);

  ModelConfig cfg;
  cfg.num_topics = a.topics;
  cfg.alpha = a.alpha;
  cfg.beta = a.beta;
  cfg.gamma = a.gamma;
  cfg.iterations = a.iterations;
  cfg.seed = a.seed;
  cfg.mode = *mode;
  cfg.perplexity_every = a.perplexity_every;
  cfg.validate();

  const auto load_start = Clock::now();
  const auto corpus = with_path(a.data, [&] {
    return load_uci_bow_file(a.data, a.vocab.empty() ? std::nullopt : std::optional<std::string>(a.vocab));
  });
  std::optional<TimestampTable> stamps;
  if (*mode == Mode::bot)
    stamps = with_path(a.timestamps, [&] { return load_timestamps_file(a.timestamps, corpus, a.length); });
  const double load_seconds = seconds_since(load_start);

  Manifest m;
  m.set("command", "train");
  m.set("version", kToolkitVersion);
  params.record(m);
  set_digest(m, "data", a.data);
  set_digest(m, "vocab", a.vocab);
  set_digest(m, "timestamps", a.timestamps);
  if (stamps) m.set("timestamp_years", show(stamps->years));

  std::optional<ParallelSetup> setup;
  const auto part_start = Clock::now();
  if (a.parts > 0) {
    setup.emplace();
    const PartitionerConfig pc{a.parts, a.repeats, a.seed};
    const auto dw = partition(build_workload(corpus), *algo, pc);
    setup->word_partitioning = dw.partitioning;
    setup->worker_count = a.parts;
    m.set("dw_eta", show(dw.report.eta));
    if (stamps) {
      const auto dts = partition_columns(build_bot_workload(*stamps, corpus.doc_count), dw.partitioning, *algo, pc);
      setup->stamp_partitioning = dts.partitioning;
      m.set("dts_eta", show(dts.report.eta));
    }
  }
  const double partition_seconds = seconds_since(part_start);

  const auto result = train(corpus, stamps ? &*stamps : nullptr, cfg, setup ? &*setup : nullptr);

  m.set("load_seconds", show(load_seconds));
  m.set("partition_seconds", show(partition_seconds));
  m.set("train_seconds", show(result.trace.empty() ? 0.0 : result.trace.back().seconds));
  if (!result.trace.empty()) m.set("final_perplexity", show(result.trace.back().perplexity));

  std::filesystem::create_directories(a.out);
  const auto dir = std::filesystem::path(a.out);
  {
    auto f = open_output((dir / "manifest.txt").string());
    m.write(f);
  }
  {
    auto f = open_output((dir / "trace.csv").string());
    write_trace_csv(f, result.trace);
  }
  {
    auto f = open_output((dir / "counts.txt").string());
    write_counts(f, {cfg.mode, result.state.counts});
  }

  out << "mode=" << to_string(cfg.mode) << " topics=" << cfg.num_topics << " iterations=" << cfg.iterations
      << " parts=" << a.parts << '\n';
  if (!result.trace.empty())
    out << std::setprecision(10) << "perplexity " << result.trace.front().perplexity << " -> "
        << result.trace.back().perplexity << '\n';
  out << "wrote " << a.out << '\n';
}

// ------------------------------------------------------------------- report

struct ReportArgs {
  std::string run;
  std::uint32_t top = 10;
  std::string vocab;
};

void add_report(CLI::App& app, ReportArgs& a) {
  app.add_option("--run", a.run, "directory written by train")->required();
  app.add_option("--top", a.top, "words per topic")->check(CLI::PositiveNumber);
  app.add_option("--vocab", a.vocab, "vocabulary file (default: the one recorded in the manifest)");
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

void cmd_report(const ReportArgs& a, std::ostream& out) {
  const auto dir = std::filesystem::path(a.run);
  const auto manifest_path = (dir / "manifest.txt").string();
  const auto counts_path = (dir / "counts.txt").string();
  const auto trace_path = (dir / "trace.csv").string();

  const auto m = read_manifest(manifest_path);
  expect_command(m, manifest_path, "train");
  auto number = [&](const std::string& key) {
    const auto v = m.get(key);
    if (!v) throw FormatError(manifest_path + ": missing " + key);
    return parse_value<double>(key, *v);
  };

  std::ifstream counts_in(counts_path);
  if (!counts_in) throw Error("cannot open " + counts_path);
  const auto dump = read_counts(counts_in, counts_path);
  std::ifstream trace_in(trace_path);
  if (!trace_in) throw Error("cannot open " + trace_path);
  const auto trace = read_trace_csv(trace_in, trace_path);

  ModelConfig cfg;
  cfg.mode = dump.mode;
  cfg.num_topics = dump.counts.topics;
  cfg.alpha = number("alpha");
  cfg.beta = number("beta");
  cfg.gamma = dump.mode == Mode::bot ? number("gamma") : cfg.gamma;
  const auto est = estimate(dump.counts, cfg);

  std::vector<std::string> vocab;
  const auto vocab_path = a.vocab.empty() ? m.get("vocab").value_or("") : a.vocab;
  if (!vocab_path.empty()) {
    vocab = read_lines(vocab_path);
    if (vocab.size() != est.words)
      throw FormatError(vocab_path + ": " + std::to_string(vocab.size()) + " words, counts have " +
                        std::to_string(est.words));
  }
  std::vector<int> years;
  if (auto y = m.get("timestamp_years")) years = parse_value<std::vector<int>>("timestamp_years", *y);
  if (dump.mode == Mode::bot && years.size() != est.timestamps)
    throw FormatError(manifest_path + ": timestamp_years does not match the counts");

  out << "mode=" << to_string(dump.mode) << " topics=" << est.topics << " docs=" << est.docs
      << " words=" << est.words << '\n';
  for (std::uint32_t k = 0; k < est.topics; ++k) {
    out << "topic " << k << ':';
    out << std::setprecision(6);
    for (const auto& [w, p] : top_words(est, k, a.top))
      out << ' ' << (vocab.empty() ? std::to_string(w) : vocab[w]) << ' ' << static_cast<double>(p);
    out << '\n';
    if (dump.mode == Mode::bot) {
      out << "timeline " << k << ':' << std::setprecision(17);
      for (std::uint32_t t = 0; t < est.timestamps; ++t)
        out << ' ' << years[t] << '=' << static_cast<double>(est.pi_at(k, t));
      out << '\n';
    }
  }

  if (trace.empty()) {
    out << "trace: empty\n";
    return;
  }
  const auto best = std::min_element(trace.begin(), trace.end(),
                                     [](const auto& x, const auto& y) { return x.perplexity < y.perplexity; });
  out << std::setprecision(10) << "trace: points=" << trace.size() << " iterations=" << trace.back().iteration
      << " initial=" << trace.front().perplexity << " final=" << trace.back().perplexity
      << " best=" << best->perplexity << "@" << best->iteration << " sampling_seconds=" << trace.back().seconds
      << '\n';
}

// ----------------------------------------------------------------- generate

struct GenerateArgs {
  std::uint32_t docs = 500;
  std::uint32_t words = 1000;
  std::uint32_t mean_length = 100;
  double zipf = 1.1;
  std::uint64_t seed = 0;
  std::uint32_t years = 0;
  int first_year = 1990;
  std::string out_data;
  std::string out_timestamps;
};

void add_generate(CLI::App& app, GenerateArgs& a) {
  app.add_option("--docs", a.docs, "documents D")->check(CLI::PositiveNumber);
  app.add_option("--words", a.words, "vocabulary size W")->check(CLI::PositiveNumber);
  app.add_option("--mean-length", a.mean_length, "tokens per document on average")->check(CLI::PositiveNumber);
  app.add_option("--zipf", a.zipf, "Zipf exponent of word frequencies");
  app.add_option("--seed", a.seed, "random seed");
  app.add_option("--years", a.years, "distinct years for a timestamp file");
  app.add_option("--first-year", a.first_year, "earliest year");
  app.add_option("--out-data", a.out_data, "docword output")->required();
  app.add_option("--out-timestamps", a.out_timestamps, "timestamp output");
}

void cmd_generate(const GenerateArgs& a, std::ostream& out) {
  if ((a.years > 0) != !a.out_timestamps.empty())
    throw UsageError("--years and --out-timestamps must be given together");
  const auto corpus = generate_synthetic(a.docs, a.words, a.mean_length, a.zipf, a.seed);
  {
    auto f = open_output(a.out_data);
    write_uci_bow(f, corpus);
  }
  if (a.years > 0) {
    auto f = open_output(a.out_timestamps);
    write_timestamps(f, make_timestamps(generate_synthetic_years(a.docs, a.years, a.first_year, a.seed), 1));
  }
  out << "docs=" << corpus.doc_count << " words=" << corpus.vocab_size << " tokens=" << corpus.total_tokens << '\n';
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Partitioned parallel Gibbs sampling for LDA and Bag of Timestamps"};
  app.name("ptm");
  app.require_subcommand(1);

  PartitionArgs partition_args;
  Params partition_params;
  auto* partition_cmd = app.add_subcommand("partition", "load-balancing ratio of partitioning algorithms");
  add_partition(*partition_cmd, partition_args, partition_params);

  TrainArgs train_args;
  Params train_params;
  auto* train_cmd = app.add_subcommand("train", "train a topic model and write run artifacts");
  add_train(*train_cmd, train_args, train_params);

  ReportArgs report_args;
  auto* report_cmd = app.add_subcommand("report", "summarize a training run");
  add_report(*report_cmd, report_args);

  GenerateArgs generate_args;
  auto* generate_cmd = app.add_subcommand("generate", "write a synthetic Zipfian corpus");
  add_generate(*generate_cmd, generate_args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : 2;
  }

  try {
    if (partition_cmd->parsed()) cmd_partition(partition_args, partition_params, out);
    if (train_cmd->parsed()) cmd_train(train_args, train_params, *train_cmd, out);
    if (report_cmd->parsed()) cmd_report(report_args, out);
    if (generate_cmd->parsed()) cmd_generate(generate_args, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace ptm
