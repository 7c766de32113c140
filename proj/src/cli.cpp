#include "rads/cli.hpp"

#include <cstdint>
#include <memory>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "rads/acquisition.hpp"
#include "rads/baselines.hpp"
#include "rads/corpusgap.hpp"
#include "rads/error.hpp"
#include "rads/harness.hpp"
#include "rads/io.hpp"
#include "rads/report.hpp"
#include "rads/rlsampler.hpp"
#include "rads/score_file.hpp"
#include "rads/seeding.hpp"
#include "rads/selection.hpp"
#include "rads/signals.hpp"

namespace rads::cli {

namespace {

using nlohmann::json;

// Reads a JSON object whose keys are long option names (with '-' or '_').
// Top-level keys apply to the subcommand being run, nested objects address a
// subcommand by name, and arrays supply multiple values.
class JsonConfig : public CLI::Config {
 public:
  explicit JsonConfig(const CLI::App* app) : app_(app) {}

  std::string to_config(const CLI::App* app, bool default_also, bool /*write_description*/,
                        std::string /*prefix*/) const override {
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    for (const CLI::Option* opt : app->get_options()) {
      if (!opt->get_configurable() || opt->get_lnames().empty()) continue;
      const std::string& key = opt->get_lnames().front();
      if (opt->count() > 0) {
        const auto& res = opt->results();
        j[key] = res.size() == 1 ? nlohmann::ordered_json(res.front())
                                 : nlohmann::ordered_json(res);
      } else if (default_also && !opt->get_default_str().empty()) {
        j[key] = opt->get_default_str();
      }
    }
    return j.dump(2) + "\n";
  }

  std::vector<CLI::ConfigItem> from_config(std::istream& in) const override {
    json root;
    try {
      root = json::parse(in);
    } catch (const json::parse_error& e) {
      throw CLI::FileError(std::string("config: malformed JSON (") + e.what() + ")");
    }
    if (!root.is_object()) throw CLI::FileError("config: top level must be a JSON object");
    std::vector<std::string> parents;
    const auto active = app_->get_subcommands();
    if (!active.empty()) parents.push_back(active.front()->get_name());
    std::vector<CLI::ConfigItem> items;
    flatten(root, parents, items);
    return items;
  }

 private:
  static std::string scalar(const json& v, const std::string& key) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number()) return v.dump();
    throw CLI::FileError("config: unsupported value for '" + key + "'");
  }

  void flatten(const json& obj, const std::vector<std::string>& parents,
               std::vector<CLI::ConfigItem>& items) const {
    for (const auto& [raw_key, value] : obj.items()) {
      std::string key = raw_key;
      for (char& c : key) {
        if (c == '_') c = '-';
      }
      if (value.is_null()) continue;
      if (value.is_object()) {
        std::vector<std::string> nested;
        if (app_->get_subcommand_no_throw(key) == nullptr) nested = parents;
        nested.push_back(key);
        flatten(value, nested, items);
        continue;
      }
      CLI::ConfigItem item;
      item.parents = parents;
      item.name = key;
      if (value.is_array()) {
        for (const auto& v : value) item.inputs.push_back(scalar(v, key));
      } else {
        item.inputs.push_back(scalar(value, key));
      }
      items.push_back(std::move(item));
    }
  }

  const CLI::App* app_;
};

void emit(const std::string& path, const std::string& content, std::ostream& out) {
  if (path.empty()) {
    out << content;
  } else {
    io::write_file_atomic(path, content);
  }
}

// Options shared by every subcommand that has a seed.
struct Common {
  std::uint64_t seed = 0;
  std::string output;
};

void add_seed(CLI::App* sub, Common& common) {
  sub->add_option("--seed", common.seed, "Base seed (environment RADS_SEED when absent)")
      ->envname("RADS_SEED");
}

void add_output(CLI::App* sub, Common& common, const std::string& what) {
  sub->add_option("-o,--output", common.output, what + " (stdout when omitted)");
}

void add_utility(CLI::App* sub, UtilityParams& u, double& lambda) {
  sub->add_option("--rho", u.rho, "Class-balance trade-off in the utility weights")
      ->check(CLI::Range(0.0, 1.0));
  sub->add_option("--clip-lo", u.clip_lo, "Lower clamp of the estimated positive prior")
      ->check(CLI::Range(0.0, 0.5));
  sub->add_option("--lambda", lambda, "Redundancy penalty strength")
      ->check(CLI::NonNegativeNumber);
}

void add_agent(CLI::App* sub, rl::AgentConfig& a, rl::EnvConfig& env) {
  sub->add_option("--episodes", a.episodes, "DQN training episodes")->check(CLI::NonNegativeNumber);
  sub->add_option("--eps-start", a.eps_start, "Initial exploration rate")->check(CLI::Range(0.0, 1.0));
  sub->add_option("--eps-end", a.eps_end, "Exploration floor")->check(CLI::Range(0.0, 1.0));
  sub->add_option("--eps-decay", a.eps_decay, "Multiplicative exploration decay per episode")
      ->check(CLI::Range(0.0, 1.0));
  sub->add_option("--buffer", a.buffer_capacity, "Replay buffer capacity")->check(CLI::PositiveNumber);
  sub->add_option("--batch", a.batch_size, "Replay minibatch size")->check(CLI::PositiveNumber);
  sub->add_option("--lr", a.learning_rate, "Q-network Adam learning rate")->check(CLI::PositiveNumber);
  sub->add_option("--gamma", a.gamma, "Discount factor")->check(CLI::Range(0.0, 1.0));
  sub->add_option("--sync-every", a.target_sync_every, "Target network sync period in episodes")
      ->check(CLI::PositiveNumber);
  sub->add_option("--dqn-hidden", a.hidden, "Q-network trunk width")->check(CLI::PositiveNumber);
  sub->add_flag("--normalized-mi-state", env.normalized_mi_state,
                "Feed min-max normalised MI into the state instead of raw MI");
}

void add_learner(CLI::App* sub, harness::LearnerConfig& l, int& passes) {
  sub->add_option("--passes", passes, "MC-dropout forward passes per sample")
      ->check(CLI::PositiveNumber);
  sub->add_option("--learner-hidden", l.hidden, "Active learner hidden width")
      ->check(CLI::PositiveNumber);
  sub->add_option("--learner-dropout", l.dropout, "Active learner dropout rate")
      ->check(CLI::Range(0.0, 0.999));
  sub->add_option("--learner-lr", l.learning_rate, "Active learner Adam learning rate")
      ->check(CLI::PositiveNumber);
  sub->add_option("--learner-epochs", l.max_epochs, "Active learner epoch cap")
      ->check(CLI::NonNegativeNumber);
  sub->add_option("--learner-batch", l.batch_size, "Active learner minibatch size")
      ->check(CLI::PositiveNumber);
  sub->add_option("--patience", l.patience, "Early-stopping patience on dev loss")
      ->check(CLI::PositiveNumber);
  sub->add_flag("--balanced-loss", l.balanced_loss,
                "Weight the learner loss by inverse class frequency");
}

struct Scenario {
  double src_rate = 0.14;
  double tgt_rate = 0.69;
  double shift_x = 0.0;
  double shift_y = 2.0;
  double noise = 1.0;
  double separation = 2.5;
};

void add_scenario(CLI::App* sub, Scenario& s) {
  sub->add_option("--src-rate", s.src_rate, "Source positive rate")->check(CLI::Range(0.0, 1.0));
  sub->add_option("--tgt-rate", s.tgt_rate, "Target positive rate")->check(CLI::Range(0.0, 1.0));
  sub->add_option("--shift-x", s.shift_x, "Target mean shift, first coordinate");
  sub->add_option("--shift-y", s.shift_y, "Target mean shift, second coordinate");
  sub->add_option("--noise", s.noise, "Isotropic feature noise")->check(CLI::PositiveNumber);
  sub->add_option("--separation", s.separation, "Distance between class means")
      ->check(CLI::PositiveNumber);
}

harness::Domains make_domains(const Scenario& s, std::uint64_t seed) {
  auto src = harness::default_source_spec(seed);
  auto tgt = harness::default_target_spec(seed);
  src.positive_rate = s.src_rate;
  tgt.positive_rate = s.tgt_rate;
  tgt.mean_shift = {s.shift_x, s.shift_y};
  src.noise_scale = tgt.noise_scale = s.noise;
  src.class_separation = tgt.class_separation = s.separation;
  return harness::generate_domains(src, tgt);
}

std::string policy_list() { return "rads, random, uncertainty, mi_only, greedy_utility"; }

harness::Policy require_policy(const std::string& text) {
  const auto p = harness::parse_policy(text);
  if (!p) {
    throw ValidationError("--policy: unknown policy '" + text + "' (expected one of " +
                          policy_list() + ")");
  }
  return *p;
}

// {"id": ..., "features": [...], "label": 0|1}; the label is required when
// `labeled` is set and ignored otherwise.
harness::LabeledSet load_features(const std::string& path, bool labeled) {
  std::istringstream in(io::read_file(path));
  std::vector<std::vector<double>> rows;
  harness::LabeledSet set;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path + ": line " + std::to_string(line_no) + ": ";
    json row;
    try {
      row = json::parse(line);
    } catch (const json::parse_error&) {
      throw ValidationError(where + "malformed JSON");
    }
    if (!row.is_object() || !row.contains("id") || !row["id"].is_string()) {
      throw ValidationError(where + "missing string field 'id'");
    }
    if (!row.contains("features") || !row["features"].is_array() || row["features"].empty()) {
      throw ValidationError(where + "missing non-empty array field 'features'");
    }
    std::vector<double> f;
    for (const auto& v : row["features"]) {
      if (!v.is_number()) throw ValidationError(where + "non-numeric feature");
      f.push_back(v.get<double>());
    }
    if (!rows.empty() && f.size() != rows.front().size()) {
      throw ValidationError(where + "feature length differs from line 1");
    }
    int label = 0;
    if (labeled) {
      if (!row.contains("label") || !row["label"].is_number_integer()) {
        throw ValidationError(where + "missing integer field 'label'");
      }
      label = row["label"].get<int>();
      if (label != 0 && label != 1) throw ValidationError(where + "label must be 0 or 1");
    }
    rows.push_back(std::move(f));
    set.labels.push_back(label);
    set.ids.push_back(row["id"].get<std::string>());
  }
  if (rows.empty()) throw ValidationError(path + ": no samples");
  set.features.resize(static_cast<Eigen::Index>(rows.front().size()),
                      static_cast<Eigen::Index>(rows.size()));
  for (std::size_t j = 0; j < rows.size(); ++j) {
    for (std::size_t i = 0; i < rows[j].size(); ++i) {
      set.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[j][i];
    }
  }
  try {
    harness::validate(set);
  } catch (const Error& e) {
    throw ValidationError(path + ": " + e.what());
  }
  return set;
}

// Integers from a comma-split option; blank items are skipped.
template <typename T>
std::vector<T> parse_list(const std::vector<std::string>& items, const std::string& option) {
  std::vector<T> out;
  for (const auto& raw : items) {
    const auto first = raw.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    const std::string text = raw.substr(first, raw.find_last_not_of(" \t") - first + 1);
    T value{};
    if (!CLI::detail::lexical_cast(text, value)) {
      throw ValidationError(option + ": '" + text + "' is not an integer");
    }
    out.push_back(value);
  }
  return out;
}

std::vector<std::uint64_t> run_seeds(std::uint64_t base, int runs,
                                     const std::vector<std::string>& seed_text) {
  auto explicit_seeds = parse_list<std::uint64_t>(seed_text, "--seeds");
  if (!explicit_seeds.empty()) return explicit_seeds;
  std::vector<std::uint64_t> seeds;
  for (int i = 0; i < runs; ++i) seeds.push_back(base + static_cast<std::uint64_t>(i));
  return seeds;
}

std::string summary(const std::vector<harness::TransferReport>& rows) {
  std::string out;
  std::size_t begin = 0;
  while (begin < rows.size()) {
    std::size_t end = begin;
    while (end < rows.size() && rows[end].budget == rows[begin].budget) ++end;
    const auto mean = harness::mean_report(
        std::span<const harness::TransferReport>(rows.data() + begin, end - begin));
    double used = 0.0;
    for (std::size_t i = begin; i < end; ++i) used += rows[i].budget_used;
    used /= static_cast<double>(end - begin);
    out += fmt::format(
        "{} budget {}: mean budget_used {:.2f}, target F1 {:.4f}, source F1 {:.4f}, "
        "delta F1 {:.4f} [{:.4f}, {:.4f}] over {} run(s)\n",
        mean.policy, mean.budget, used, mean.target.f1,
        mean.source.f1, mean.delta_f1, mean.ci_low, mean.ci_high, end - begin);
    begin = end;
  }
  return out;
}

struct TransferOptions {
  Common common;
  Scenario scenario;
  harness::TransferConfig cfg;
  std::string policy = "rads";
  int runs = 5;
  std::vector<std::string> seeds;
  std::string json_output;
};

void add_transfer(CLI::App* sub, TransferOptions& t) {
  add_seed(sub, t.common);
  add_output(sub, t.common, "CSV report path");
  sub->add_option("--json-output", t.json_output, "Optional JSON report path");
  sub->add_option("--policy", t.policy, "Selection policy: " + policy_list());
  sub->add_option("--runs", t.runs, "Runs with seeds seed, seed+1, ...")->check(CLI::PositiveNumber);
  sub->add_option("--seeds", t.seeds, "Explicit run seeds (overrides --runs)")->delimiter(',');
  sub->add_option("--bootstrap", t.cfg.bootstrap_resamples, "Bootstrap resamples for the delta-F1 interval")
      ->check(CLI::PositiveNumber);
  add_scenario(sub, t.scenario);
  add_learner(sub, t.cfg.learner, t.cfg.passes);
  add_utility(sub, t.cfg.utility, t.cfg.env.lambda);
  add_agent(sub, t.cfg.agent, t.cfg.env);
}

void validate_transfer(const TransferOptions& t) {
  require_policy(t.policy);
  validate(t.cfg.utility);
  validate(t.cfg.learner);
  validate(t.cfg.agent);
}

int write_transfer(const TransferOptions& t, const std::vector<harness::TransferReport>& rows,
                   std::ostream& out) {
  emit(t.common.output, report::to_csv(rows), out);
  if (!t.json_output.empty()) io::write_file_atomic(t.json_output, report::to_json(rows));
  if (!t.common.output.empty()) out << summary(rows);
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Budgeted active sampling on MC-dropout score files", "rads"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  app.fallthrough();
  app.config_formatter(std::make_shared<JsonConfig>(&app));
  app.set_config("--config", "", "JSON config file; command-line flags take precedence");
  app.allow_config_extras(false);

  // score
  struct {
    Common common;
    Scenario scenario;
    harness::LearnerConfig learner;
    int passes = 10;
    std::string source, dev, pool;
  } score;
  CLI::App* score_cmd = app.add_subcommand(
      "score", "Train the active learner and write MC-dropout probabilities of a pool");
  add_seed(score_cmd, score.common);
  add_output(score_cmd, score.common, "Score file path");
  score_cmd->add_option("--source", score.source,
                        "Labeled source JSON lines {id, features, label}; synthetic when omitted");
  score_cmd->add_option("--dev", score.dev, "Labeled dev JSON lines (defaults to --source)");
  score_cmd->add_option("--pool", score.pool,
                        "Unlabeled pool JSON lines {id, features}; synthetic target when omitted");
  add_scenario(score_cmd, score.scenario);
  add_learner(score_cmd, score.learner, score.passes);

  // select
  struct {
    Common common;
    std::string scores;
    std::string policy = "rads";
    int budget = 5;
    harness::TransferConfig cfg;
    bool trace = false;
  } sel;
  CLI::App* select_cmd = app.add_subcommand("select", "Choose samples from a score file");
  add_seed(select_cmd, sel.common);
  add_output(select_cmd, sel.common, "Selection JSON path");
  select_cmd->add_option("scores,--scores", sel.scores, "Score file (JSON lines)")->required();
  select_cmd->add_option("--policy", sel.policy, "Selection policy: " + policy_list());
  select_cmd->add_option("--budget", sel.budget, "Annotation budget");
  select_cmd->add_flag("--trace", sel.trace, "Include the RL training return trace");
  add_utility(select_cmd, sel.cfg.utility, sel.cfg.env.lambda);
  add_agent(select_cmd, sel.cfg.agent, sel.cfg.env);

  // experiment
  TransferOptions exp;
  int exp_budget = 5;
  CLI::App* exp_cmd = app.add_subcommand(
      "experiment", "Synthetic transfer run: select, annotate, retrain, evaluate");
  add_transfer(exp_cmd, exp);
  exp_cmd->add_option("--budget", exp_budget, "Annotation budget (0 = zero-shot)");

  // sweep
  TransferOptions sw;
  std::vector<std::string> budget_text{"1", "2", "4", "8", "16", "32"};
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "Transfer runs over a budget grid");
  add_transfer(sweep_cmd, sw);
  sweep_cmd->add_option("--budgets", budget_text, "Ascending budget list")->delimiter(',');

  // corpusgap
  struct {
    Common common;
    std::string a, b;
    corpusgap::GapConfig cfg;
  } gap;
  CLI::App* gap_cmd = app.add_subcommand(
      "corpusgap", "Lexical coverage, Jaccard, KL and TF-IDF profile of two corpora");
  add_output(gap_cmd, gap.common, "JSON report path");
  gap_cmd->add_option("a,--a", gap.a, "Corpus A: directory of text files or JSON lines {id, text}")
      ->required();
  gap_cmd->add_option("b,--b", gap.b, "Corpus B")->required();
  gap_cmd->add_option("--max-n", gap.cfg.max_n, "Longest n-gram")->check(CLI::Range(1, 2));
  gap_cmd->add_option("--epsilon", gap.cfg.kl.epsilon, "KL smoothing constant")
      ->check(CLI::PositiveNumber);
  gap_cmd->add_option("--top-k", gap.cfg.top_k, "TF-IDF terms per corpus")
      ->check(CLI::PositiveNumber);

  // validate
  std::string validate_path;
  CLI::App* validate_cmd = app.add_subcommand("validate", "Check a score file");
  validate_cmd->add_option("file", validate_path, "Score file (JSON lines)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ConfigError& e) {
    const std::string what = e.what();
    const std::string prefix = "INI was not able to parse ";
    if (what.rfind(prefix, 0) == 0) {
      err << "error: config: unrecognized key '" << what.substr(prefix.size()) << "'\n";
    } else {
      err << "error: config: " << what << "\n";
    }
    return kExitUsage;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (score_cmd->parsed()) {
      validate(score.learner);
      harness::LabeledSet source, dev;
      harness::UnlabeledPool pool;
      if (!score.source.empty()) {
        source = load_features(score.source, true);
        dev = score.dev.empty() ? source : load_features(score.dev, true);
      }
      if (!score.pool.empty()) pool = harness::strip_labels(load_features(score.pool, false));
      if (score.source.empty() || score.pool.empty()) {
        const auto domains = make_domains(score.scenario, score.common.seed);
        if (score.source.empty()) {
          source = domains.source.train;
          dev = domains.source.dev;
        }
        if (score.pool.empty()) pool = harness::strip_labels(domains.target.train);
      }
      if (source.features.rows() != pool.features.rows()) {
        throw ValidationError("--pool: feature length differs from the source data");
      }
      const auto net = harness::train_learner(source, dev, score.learner,
                                              derive_seed(score.common.seed, 61));
      const auto scores =
          harness::score_pool(net, pool, score.passes, derive_seed(score.common.seed, 62));
      emit(score.common.output, to_jsonl(scores), out);
      return kExitOk;
    }

    if (select_cmd->parsed()) {
      const auto policy = require_policy(sel.policy);
      if (sel.budget < 1) throw ValidationError("--budget: must be >= 1");
      validate(sel.cfg.utility);
      validate(sel.cfg.agent);
      const ScorePool pool = load_score_file(sel.scores);
      if (static_cast<std::size_t>(sel.budget) > pool.size()) {
        throw ValidationError(fmt::format("--budget: {} exceeds pool size {}", sel.budget,
                                          pool.size()));
      }
      if (pool.classes() != 2) throw ValidationError("--scores: selection needs 2 classes");
      const auto signals = build_signals(pool);
      const auto weights = class_weights(estimate_priors(signals), sel.cfg.utility);
      SelectionResult result =
          harness::run_policy(policy, signals, weights, sel.budget, sel.cfg, sel.common.seed);
      if (!sel.trace) result.episodes_return.clear();
      emit(sel.common.output, to_json(result), out);
      return kExitOk;
    }

    if (exp_cmd->parsed()) {
      validate_transfer(exp);
      if (exp_budget < 0) throw ValidationError("--budget: must be >= 0");
      const auto domains = make_domains(exp.scenario, exp.common.seed);
      if (static_cast<std::size_t>(exp_budget) > domains.target.train.size()) {
        throw ValidationError(fmt::format("--budget: {} exceeds target pool size {}",
                                          exp_budget, domains.target.train.size()));
      }
      const auto seeds = run_seeds(exp.common.seed, exp.runs, exp.seeds);
      const int b[] = {exp_budget};
      const auto rows =
          harness::sweep(domains, require_policy(exp.policy), b, seeds, exp.cfg);
      return write_transfer(exp, rows, out);
    }

    if (sweep_cmd->parsed()) {
      validate_transfer(sw);
      const std::vector<int> budgets = parse_list<int>(budget_text, "--budgets");
      if (budgets.empty()) throw ValidationError("--budgets: empty list");
      if (!std::is_sorted(budgets.begin(), budgets.end())) {
        throw ValidationError("--budgets: must be ascending");
      }
      const auto domains = make_domains(sw.scenario, sw.common.seed);
      if (budgets.front() < 0 ||
          static_cast<std::size_t>(budgets.back()) > domains.target.train.size()) {
        throw ValidationError(fmt::format("--budgets: values must lie in [0, {}]",
                                          domains.target.train.size()));
      }
      const auto seeds = run_seeds(sw.common.seed, sw.runs, sw.seeds);
      const auto rows = harness::sweep(domains, require_policy(sw.policy), budgets, seeds, sw.cfg);
      return write_transfer(sw, rows, out);
    }

    if (gap_cmd->parsed()) {
      const auto a = corpusgap::load_corpus(gap.a);
      const auto b = corpusgap::load_corpus(gap.b);
      if (a.empty()) throw ValidationError("a: corpus has no documents");
      if (b.empty()) throw ValidationError("b: corpus has no documents");
      const auto report = corpusgap::compare(a, b, gap.cfg);
      emit(gap.common.output, corpusgap::to_json(report), out);
      return kExitOk;
    }

    if (validate_cmd->parsed()) {
      const ScorePool pool = load_score_file(validate_path);
      out << fmt::format("ok: {} entries, {} passes, {} classes\n", pool.size(),
                         pool.passes(), pool.classes());
      return kExitOk;
    }
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ParameterError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace rads::cli
