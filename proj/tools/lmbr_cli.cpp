// Command-line front end. Exit codes: 0 ok, 1 usage, 2 data error,
// 3 scorer transport error.
#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include "lmbr/bleu.hpp"
#include "lmbr/bpe.hpp"
#include "lmbr/decoder.hpp"
#include "lmbr/errors.hpp"
#include "lmbr/experiment.hpp"
#include "lmbr/external_scorer.hpp"
#include "lmbr/lattice_io.hpp"
#include "lmbr/nbest.hpp"
#include "lmbr/ngram_lm.hpp"
#include "lmbr/posteriors.hpp"
#include "lmbr/synth.hpp"

using namespace lmbr;

namespace {

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read " + path);
  return in;
}

// Writes to `path`, or stdout when empty or "-".
class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty() && path != "-") {
      file_.open(path);
      if (!file_) throw DataError("cannot write " + path);
    }
  }
  std::ostream& get() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }

 private:
  std::ofstream file_;
};

std::vector<std::vector<TokenId>> read_token_lines(const std::string& path, SymbolTable& symbols) {
  auto in = open_in(path);
  std::vector<std::vector<TokenId>> out;
  std::string line;
  while (std::getline(in, line)) out.push_back(symbols.intern_all(split_tokens(line)));
  return out;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

struct ScorerOptions {
  std::string spec = "uniform";
  std::vector<std::string> ensemble;
  int lm_order = 3;
  double lm_k = 0.1;
  double timeout = 30.0;
};

void add_scorer_options(CLI::App* cmd, ScorerOptions& o) {
  cmd->add_option("--scorer", o.spec, "uniform | ngramlm:CORPUS | toy:TASKDIR | ext:ADDRESS")->capture_default_str();
  cmd->add_option("--ensemble", o.ensemble, "Comma-separated scorer specs combined as a product")->delimiter(',');
  cmd->add_option("--lm-order", o.lm_order, "Order of ngramlm scorers")->capture_default_str();
  cmd->add_option("--lm-k", o.lm_k, "Add-k constant of ngramlm scorers")->capture_default_str();
  cmd->add_option("--timeout", o.timeout, "External scorer timeout in seconds")->capture_default_str();
}

// Re-interns every sequence of `task` into `target` so that two tasks read
// from separate directories share token ids.
void remap_task(SynthTask& task, SymbolTable& target) {
  auto remap = [&](std::vector<TokenId>& seq) {
    for (auto& t : seq) t = target.intern(task.symbols.symbol(t));
  };
  for (auto* set : {&task.sources, &task.references, &task.lm_corpus, &task.train_sources})
    for (auto& seq : *set) remap(seq);
  for (auto& list : task.nbest)
    for (auto& e : list) remap(e.tokens);
}

std::shared_ptr<Scorer> make_one_scorer(const std::string& spec, const ScorerOptions& o, SymbolTable& symbols,
                                        const std::vector<TokenId>& uniform_vocab) {
  if (spec == "uniform") return std::make_shared<UniformScorer>(uniform_vocab);
  if (spec.rfind("ngramlm:", 0) == 0)
    return std::make_shared<NgramLM>(NgramLM::train(read_token_lines(spec.substr(8), symbols), o.lm_order, o.lm_k));
  if (spec.rfind("toy:", 0) == 0) {
    auto task = read_synth_task(spec.substr(4));
    remap_task(task, symbols);
    return task_scorer(task, o.lm_order, o.lm_k);
  }
  if (spec.rfind("ext:", 0) == 0) {
    auto timeout = std::chrono::milliseconds(static_cast<long long>(o.timeout * 1000));
    return std::make_shared<ExternalScorer>(open_channel(spec.substr(4)), symbols, timeout);
  }
  throw CLI::ValidationError("--scorer", "unknown scorer '" + spec + "'");
}

std::shared_ptr<Scorer> make_scorer(const ScorerOptions& o, SymbolTable& symbols,
                                    const std::vector<TokenId>& uniform_vocab) {
  if (o.ensemble.empty()) return make_one_scorer(o.spec, o, symbols, uniform_vocab);
  std::vector<std::shared_ptr<Scorer>> members;
  for (const auto& s : o.ensemble) members.push_back(make_one_scorer(s, o, symbols, uniform_vocab));
  return std::make_shared<EnsembleScorer>(std::move(members));
}

void set_sentence(Scorer& scorer, const std::string& id) {
  if (auto* ext = dynamic_cast<ExternalScorer*>(&scorer)) ext->set_sentence_id(id);
}

std::vector<TokenId> uniform_vocab_for(const std::vector<TokenId>& lattice_vocab) {
  // OOV tokens, UNK included, take the uniform default anyway.
  std::vector<TokenId> v = lattice_vocab;
  v.push_back(kEos);
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

struct WeightOptions {
  double lambda = 1.0;
  std::array<double, 5> theta{1, 1, 1, 1, 1};
  double alpha = kDefaultAlpha;
  double beta = 1.0;
  int max_order = 4;

  MbrWeights weights() const {
    MbrWeights w;
    w.theta0 = theta[0];
    for (int n = 1; n <= kMaxOrder; ++n) w.theta[static_cast<std::size_t>(n - 1)] = theta[static_cast<std::size_t>(n)];
    return w;
  }
};

void add_table_options(CLI::App* cmd, WeightOptions& w) {
  cmd->add_option("--max-order", w.max_order, "Highest n-gram order")->check(CLI::Range(1, kMaxOrder))->capture_default_str();
  cmd->add_option("--alpha", w.alpha, "Uniform mixture weight")->check(CLI::Range(0.0, 1.0))->capture_default_str();
  cmd->add_option("--beta", w.beta, "Lattice weight scale")->capture_default_str();
}

void add_weight_options(CLI::App* cmd, WeightOptions& w) {
  add_table_options(cmd, w);
  cmd->add_option("--lambda", w.lambda, "Scorer weight")->check(CLI::NonNegativeNumber)->capture_default_str();
  for (int i = 0; i <= kMaxOrder; ++i)
    cmd->add_option("--theta" + std::to_string(i), w.theta[static_cast<std::size_t>(i)],
                    i == 0 ? "Length reward per token" : "Weight of order-" + std::to_string(i) + " posteriors")
        ->capture_default_str();
}

PosteriorTable table_for(const Lattice& raw, const WeightOptions& w, const SymbolTable& symbols) {
  const auto lat = normalize_posterior(raw, w.beta);
  return compute_posterior_table(lat, w.max_order, w.alpha, w.beta, lattice_hash(raw, symbols));
}

void print_hypothesis(std::ostream& out, const std::string& id, const Hypothesis& h, const SymbolTable& symbols) {
  out << id << " ||| " << symbols.join(h.tokens) << " ||| " << fmt(h.score) << " ||| " << fmt(h.evidence) << " ||| "
      << fmt(h.scorer_logprob) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lattice MBR tools: n-gram posteriors, combined decoding and evaluation"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key=value file mirroring the flags (use [subcommand] sections)");
  std::string symbols_path;
  app.add_option("--symbols", symbols_path, "Symbol table (token<TAB>id); unknown tokens become errors");

  // posteriors
  auto* posteriors = app.add_subcommand("posteriors", "Lattice to n-gram posterior table");
  std::string lattice_path, out_path;
  WeightOptions w;
  posteriors->add_option("lattice", lattice_path, "Lattice file")->required();
  posteriors->add_option("-o,--output", out_path, "Output file (default stdout)");
  add_table_options(posteriors, w);

  // lmbr
  auto* lmbr_cmd = app.add_subcommand("lmbr", "Rescore hypotheses by evidence alone");
  std::string hyps_path;
  lmbr_cmd->add_option("lattice", lattice_path, "Evidence lattice")->required();
  lmbr_cmd->add_option("--hyps", hyps_path, "Hypotheses, one per line (default: lattice paths)");
  add_weight_options(lmbr_cmd, w);

  // decode
  auto* decode = app.add_subcommand("decode", "Beam search over evidence + lambda * scorer");
  std::string source_text, batch_path, table_path, sentence_id = "0";
  std::size_t beam = kDefaultBeam, max_len = 0, nbest_out = 1, candidate_cap = 0;
  bool constrain = false;
  ScorerOptions so;
  decode->add_option("--lattice", lattice_path, "Evidence lattice");
  decode->add_option("--table", table_path, "Precomputed posterior table instead of --lattice");
  decode->add_option("--source", source_text, "Source sentence");
  decode->add_option("--id", sentence_id, "Sentence id")->capture_default_str();
  decode->add_option("--batch", batch_path, "Lines `id ||| source ||| lattice-file` (lattice optional)");
  decode->add_option("--beam", beam, "Beam width")->check(CLI::PositiveNumber)->capture_default_str();
  decode->add_option("--max-len", max_len, "Length cap (0: 2 * source length + 5)")->capture_default_str();
  decode->add_option("--nbest", nbest_out, "Hypotheses printed per sentence")->capture_default_str();
  decode->add_option("--candidate-cap", candidate_cap, "Scorer tokens expanded per step (0: all)");
  decode->add_flag("--constrain", constrain, "Restrict outputs to lattice paths");
  add_weight_options(decode, w);
  add_scorer_options(decode, so);

  // nbest2lat
  auto* nbest2lat = app.add_subcommand("nbest2lat", "Compile n-best lists into lattices");
  std::string nbest_path, out_dir;
  nbest2lat->add_option("nbest", nbest_path, "n-best file")->required();
  nbest2lat->add_option("--outdir", out_dir, "Write one <id>.lat per list (default: stdout, single list)");

  // bpe-learn
  auto* bpe_learn = app.add_subcommand("bpe-learn", "Learn BPE merges from a tokenized corpus");
  std::string corpus_path;
  std::size_t merges = 1000;
  bpe_learn->add_option("corpus", corpus_path, "Corpus file")->required();
  bpe_learn->add_option("--merges", merges, "Number of merges")->capture_default_str();
  bpe_learn->add_option("-o,--output", out_path, "Model file (default stdout)");

  // bpe-convert
  auto* bpe_convert = app.add_subcommand("bpe-convert", "Map a word lattice to subword units");
  std::string model_path;
  bpe_convert->add_option("lattice", lattice_path, "Word lattice")->required();
  bpe_convert->add_option("--model", model_path, "BPE model")->required();
  bpe_convert->add_option("-o,--output", out_path, "Output file (default stdout)");

  // bleu
  auto* bleu = app.add_subcommand("bleu", "Corpus BLEU of candidates against references");
  std::string cand_path, ref_path;
  bleu->add_option("candidates", cand_path, "Candidate file")->required();
  bleu->add_option("references", ref_path, "Reference file")->required();

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic translation task");
  SynthConfig sc;
  synth->add_option("--seed", sc.seed)->capture_default_str();
  synth->add_option("--size", sc.size)->capture_default_str();
  synth->add_option("--vocab", sc.vocab)->capture_default_str();
  synth->add_option("--decay", sc.decay, "n-best score step per rank")->capture_default_str();
  synth->add_option("--noise", sc.noise)->check(CLI::Range(0.0, 1.0))->capture_default_str();
  synth->add_option("--nbest-size", sc.nbest_size)->capture_default_str();
  synth->add_option("--lm-corpus-size", sc.lm_corpus_size)->capture_default_str();
  synth->add_option("--out", out_dir, "Output directory")->required();

  // tune
  auto* tune = app.add_subcommand("tune", "Grid-search lambda for mbr-decode on a dev task");
  std::string task_dir;
  std::vector<double> grid{0.1, 0.3, 1.0, 3.0};
  std::size_t tune_nbest = 1000;
  tune->add_option("task", task_dir, "Task directory (synth layout)")->required();
  tune->add_option("--grid", grid, "Lambda values")->delimiter(',')->capture_default_str();
  tune->add_option("--nbest-size", tune_nbest, "n-best entries used for the evidence lattices")->capture_default_str();
  tune->add_option("--beam", beam)->capture_default_str();
  tune->add_option("--max-len", max_len)->capture_default_str();
  add_weight_options(tune, w);
  add_scorer_options(tune, so);

  // compare
  auto* compare = app.add_subcommand("compare", "Run every decoding mode over n-best sizes; CSV out");
  std::string dev_dir;
  std::size_t dev_size = 100;
  std::vector<std::string> modes = kAllModes;
  std::vector<std::size_t> sizes{1, 10, 100, 1000};
  compare->add_option("--task", task_dir, "Task directory (default: generate with the synth flags)");
  compare->add_option("--dev", dev_dir, "Dev task directory for lambda tuning (default: split off the generated task)");
  compare->add_option("--modes", modes)->delimiter(',')->capture_default_str();
  compare->add_option("--sizes", sizes)->delimiter(',')->capture_default_str();
  compare->add_option("--grid", grid, "Lambda values")->delimiter(',')->capture_default_str();
  compare->add_option("--beam", beam)->capture_default_str();
  compare->add_option("--seed", sc.seed)->capture_default_str();
  compare->add_option("--size", sc.size)->capture_default_str();
  compare->add_option("--vocab", sc.vocab)->capture_default_str();
  compare->add_option("--decay", sc.decay, "n-best score step per rank")->capture_default_str();
  compare->add_option("--noise", sc.noise)->check(CLI::Range(0.0, 1.0))->capture_default_str();
  compare->add_option("--dev-size", dev_size, "Generated dev sentences")->capture_default_str();
  compare->add_option("-o,--output", out_path, "CSV file (default stdout)");
  add_weight_options(compare, w);
  add_scorer_options(compare, so);
  compare->get_option("--scorer")->default_str("task")->description("task (toy model trained on the task) | uniform | ngramlm:CORPUS | toy:TASKDIR | ext:ADDRESS");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    SymbolTable symbols;
    if (!symbols_path.empty()) {
      auto in = open_in(symbols_path);
      symbols = SymbolTable::read(in);
    }

    if (*posteriors) {
      const auto raw = read_lattice_file(lattice_path, symbols);
      Output out(out_path);
      write_posterior_table(out.get(), table_for(raw, w, symbols), symbols);
    } else if (*lmbr_cmd) {
      const auto raw = read_lattice_file(lattice_path, symbols);
      const auto table = table_for(raw, w, symbols);
      std::vector<std::vector<TokenId>> hyps;
      if (hyps_path.empty()) {
        for (auto& p : enumerate_paths(normalize_posterior(raw, w.beta), 1'000'000)) hyps.push_back(p.tokens);
      } else {
        hyps = read_token_lines(hyps_path, symbols);
      }
      CombinationConfig c{0.0, w.weights(), &table};
      const auto best = lmbr_rescore(hyps, c);
      std::cout << symbols.join(hyps[best.index]) << " ||| " << fmt(best.evidence) << '\n';
    } else if (*decode) {
      struct Job {
        std::string id, source, lattice;
      };
      std::vector<Job> jobs;
      if (!batch_path.empty()) {
        auto in = open_in(batch_path);
        std::string line;
        while (std::getline(in, line)) {
          if (line.empty()) continue;
          auto f = split_fields(line);
          if (f.size() < 2 || f.size() > 3) throw DataError("batch line needs `id ||| source [||| lattice]`");
          jobs.push_back({f[0], f[1], f.size() == 3 ? f[2] : ""});
        }
      } else {
        jobs.push_back({sentence_id, source_text, lattice_path});
      }
      std::vector<Lattice> lattices;
      std::vector<PosteriorTable> tables;
      std::vector<TokenId> lattice_vocab;
      for (const auto& j : jobs) {
        if (!j.lattice.empty()) {
          lattices.push_back(read_lattice_file(j.lattice, symbols));
          tables.push_back(table_for(lattices.back(), w, symbols));
        } else {
          lattices.emplace_back();
          tables.emplace_back();
        }
        for (auto t : lattices.back().vocabulary()) lattice_vocab.push_back(t);
      }
      if (!table_path.empty()) {
        if (jobs.size() != 1) throw DataError("--table applies to single-sentence decoding");
        auto in = open_in(table_path);
        tables[0] = read_posterior_table(in, symbols);
        for (auto t : tables[0].unigram_tokens()) lattice_vocab.push_back(t);
      }
      auto scorer = make_scorer(so, symbols, uniform_vocab_for(lattice_vocab));
      for (std::size_t i = 0; i < jobs.size(); ++i) {
        DecodeConfig cfg;
        cfg.beam = beam;
        cfg.max_len = max_len;
        cfg.candidate_cap = candidate_cap;
        cfg.combination = CombinationConfig{w.lambda, w.weights(), &tables[i]};
        if (constrain) {
          if (lattices[i].num_states() == 0) throw DataError("--constrain needs a lattice");
          cfg.constrain_to = &lattices[i];
        }
        set_sentence(*scorer, jobs[i].id);
        const auto source = symbols.intern_all(split_tokens(jobs[i].source));
        const auto result = beam_decode(source, *scorer, cfg);
        for (std::size_t k = 0; k < std::min(nbest_out, result.hypotheses.size()); ++k)
          print_hypothesis(std::cout, jobs[i].id, result.hypotheses[k], symbols);
        if (result.truncated) std::cerr << "sentence " << jobs[i].id << ": best hypothesis hit the length cap\n";
      }
    } else if (*nbest2lat) {
      auto in = open_in(nbest_path);
      const auto lists = read_nbest(in, symbols);
      if (out_dir.empty() && lists.size() != 1)
        throw DataError("file holds " + std::to_string(lists.size()) + " lists; use --outdir");
      if (!out_dir.empty()) {
        std::error_code ec;
        std::filesystem::create_directories(out_dir, ec);
        if (ec) throw DataError("cannot create " + out_dir + ": " + ec.message());
      }
      for (const auto& list : lists) {
        std::vector<std::string> warnings;
        const auto lat = nbest_to_lattice(list.entries, &warnings);
        for (const auto& msg : warnings) std::cerr << "list " << list.id << ": " << msg << '\n';
        Output out(out_dir.empty() ? "" : out_dir + "/" + list.id + ".lat");
        write_lattice(out.get(), lat, symbols);
      }
    } else if (*bpe_learn) {
      auto in = open_in(corpus_path);
      std::map<std::string, std::size_t> counts;
      std::string line;
      while (std::getline(in, line))
        for (const auto& tok : split_tokens(line)) ++counts[tok];
      Output out(out_path);
      learn_bpe(counts, merges).write(out.get());
    } else if (*bpe_convert) {
      auto min = open_in(model_path);
      const auto model = BpeModel::read(min);
      const auto raw = read_lattice_file(lattice_path, symbols);
      Output out(out_path);
      write_lattice(out.get(), convert_lattice(normalize_posterior(raw), model, symbols), symbols);
    } else if (*bleu) {
      const auto cands = read_token_lines(cand_path, symbols);
      const auto refs = read_token_lines(ref_path, symbols);
      std::cout << fmt(corpus_bleu(cands, refs)) << '\n';
    } else if (*synth) {
      write_synth_task(synth_generate(sc), out_dir);
    } else if (*tune) {
      const auto task = read_synth_task(task_dir);
      SymbolTable& ts = const_cast<SymbolTable&>(task.symbols);
      const auto lattices = compile_lattices(task.nbest, tune_nbest, w.beta);
      std::vector<PosteriorTable> tables;
      std::vector<TokenId> vocab;
      for (const auto& lat : lattices) {
        tables.push_back(compute_posterior_table(lat, w.max_order, w.alpha, w.beta));
        for (auto t : lat.vocabulary()) vocab.push_back(t);
      }
      auto scorer = make_scorer(so, ts, uniform_vocab_for(vocab));
      DecodeConfig cfg;
      cfg.beam = beam;
      cfg.max_len = max_len;
      cfg.combination.weights = w.weights();
      std::cout << tune_lambda(task.sources, task.references, tables, grid, *scorer, cfg) << '\n';
    } else if (*compare) {
      if (compare->get_option("--scorer")->count() == 0) so.spec = "task";
      SynthTask test, dev;
      if (!task_dir.empty()) {
        test = read_synth_task(task_dir);
        if (!dev_dir.empty()) {
          dev = read_synth_task(dev_dir);
          remap_task(dev, test.symbols);
        }
      } else {
        SynthConfig full = sc;
        full.size = sc.size + dev_size;
        std::tie(dev, test) = split_task(synth_generate(full), dev_size);
      }
      const bool have_dev = !dev.sources.empty();
      ScorerFactory factory;
      if (so.spec == "task" && so.ensemble.empty()) {
        auto shared = task_scorer(test, so.lm_order, so.lm_k);
        factory = [shared] { return shared; };
      } else {
        std::vector<TokenId> vocab;
        for (const auto& list : test.nbest)
          for (const auto& e : list)
            vocab.insert(vocab.end(), e.tokens.begin(), e.tokens.end());
        std::sort(vocab.begin(), vocab.end());
        vocab.erase(std::unique(vocab.begin(), vocab.end()), vocab.end());
        auto uv = uniform_vocab_for(vocab);
        SymbolTable* ts = &test.symbols;
        factory = [&so, ts, uv] { return make_scorer(so, *ts, uv); };
      }
      CompareConfig cc;
      cc.modes = modes;
      cc.nbest_sizes = sizes;
      cc.lambda_grid = grid;
      cc.weights = w.weights();
      cc.alpha = w.alpha;
      cc.beta = w.beta;
      cc.max_order = w.max_order;
      cc.beam = beam;
      const auto report = run_comparison(test, have_dev ? &dev : nullptr, factory, cc);
      Output out(out_path);
      write_report_csv(out.get(), report);
      for (const auto& r : report.rows)
        if (r.mode != "smt-baseline" && r.mode != "pure-scorer")
          std::cerr << r.mode << " n=" << r.nbest_size << " lambda=" << r.lambda << '\n';
    }
  } catch (const TransportError& e) {
    std::cerr << "transport error: " << e.what() << '\n';
    return 3;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 2;
  } catch (const CLI::ValidationError& e) {
    std::cerr << e.what() << '\n';
    return 1;
  }
  return 0;
}
