// nplsa: synthetic corpus generation, topic model training and evaluation.
//
//   nplsa synth --profile desk --seed 7 --out runs/synth
//   nplsa train --algo auto --corpus runs/synth/corpus.txt --seed 7 --out runs/auto
//   nplsa eval  --model runs/auto/model.json --truth runs/synth/truth.json --seed 7 --out runs/auto
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 algorithmic failure.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "nplsa/autostop.hpp"
#include "nplsa/corpus.hpp"
#include "nplsa/errors.hpp"
#include "nplsa/metrics.hpp"
#include "nplsa/model_io.hpp"
#include "nplsa/nplsa.hpp"
#include "nplsa/plsa.hpp"
#include "nplsa/rng.hpp"
#include "nplsa/synthgen.hpp"
#include "nplsa/trace.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

enum ExitCode { kOk = 0, kUsage = 1, kData = 2, kAlgorithm = 3 };

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EmFlags {
    std::size_t max_iters = 200;
    double rel_tol = 1e-5;
    double floor = 1e-9;
    std::size_t fold_in_iters = 50;
    double fold_in_tol = 1e-6;
    std::size_t threads = 1;

    nplsa::EmConfig to_config(std::uint64_t seed) const {
        nplsa::EmConfig c;
        c.max_iters = max_iters;
        c.rel_tol = rel_tol;
        c.seed = seed;
        c.smoothing_floor = floor;
        c.fold_in_max_iters = fold_in_iters;
        c.fold_in_rel_tol = fold_in_tol;
        c.threads = threads;
        return c;
    }

    json to_json() const {
        return {{"max_iters", max_iters}, {"rel_tol", rel_tol},         {"smoothing_floor", floor},
                {"fold_in_max_iters", fold_in_iters}, {"fold_in_rel_tol", fold_in_tol}, {"threads", threads}};
    }
};

void add_em_flags(CLI::App* app, EmFlags& em) {
    app->add_option("--max-iters", em.max_iters, "EM iteration (or sweep) budget")->check(CLI::PositiveNumber);
    app->add_option("--rel-tol", em.rel_tol, "relative log-likelihood convergence threshold");
    app->add_option("--floor", em.floor, "topic probability floor, in [0, 1e-3]");
    app->add_option("--fold-in-iters", em.fold_in_iters, "fold-in iteration budget")->check(CLI::PositiveNumber);
    app->add_option("--fold-in-tol", em.fold_in_tol, "fold-in relative convergence threshold");
    app->add_option("--threads", em.threads, "cap on internal data parallelism")->check(CLI::PositiveNumber);
}

void ensure_output_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw nplsa::DataError("cannot create output directory " + dir);
}

void require_readable(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw nplsa::DataError("cannot read " + path);
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

// Expands "--config FILE" into flags placed before the command-line ones, so
// explicit flags win. Lines are key=value; '#' starts a comment; a value of
// true/false toggles a flag.
std::vector<std::string> expand_config(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    std::vector<std::string> rest;
    std::vector<std::string> from_file;
    for (std::size_t i = 0; i < args.size(); ++i) {
        std::string path;
        if (args[i] == "--config") {
            if (i + 1 == args.size()) throw UsageError("--config needs a file");
            path = args[++i];
        } else if (args[i].rfind("--config=", 0) == 0) {
            path = args[i].substr(9);
        } else {
            rest.push_back(args[i]);
            continue;
        }
        std::ifstream in(path);
        if (!in) throw nplsa::DataError("cannot read config file " + path);
        std::string line;
        for (std::size_t n = 1; std::getline(in, line); ++n) {
            line = trim(line.substr(0, line.find('#')));
            if (line.empty()) continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos) {
                throw UsageError(path + ":" + std::to_string(n) + ": expected key=value");
            }
            const auto key = trim(line.substr(0, eq));
            const auto value = trim(line.substr(eq + 1));
            if (value == "false") continue;
            from_file.push_back("--" + key);
            if (value != "true") from_file.push_back(value);
        }
    }
    if (from_file.empty()) return rest;
    // The subcommand name must stay in front.
    const auto sub = std::find_if(rest.begin(), rest.end(),
                                  [](const std::string& a) { return a == "synth" || a == "train" || a == "eval"; });
    if (sub == rest.end()) throw UsageError("--config must follow a subcommand");
    rest.insert(sub + 1, from_file.begin(), from_file.end());
    return rest;
}

std::vector<std::string> split_terms(const std::string& text) {
    std::istringstream in(text);
    std::vector<std::string> out;
    std::string t;
    while (in >> t) out.push_back(t);
    return out;
}

// ---------------------------------------------------------------- synth ---

struct SynthArgs {
    std::string profile = "paper";
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> docs, doc_len, topics, vocab;
    std::optional<double> alpha, beta, min_topic_dist;
    std::string out;
    bool latent = false;
};

int cmd_synth(const SynthArgs& a) {
    if (!a.seed) throw UsageError("--seed is required");
    auto cfg = a.profile == "desk" ? nplsa::SynthConfig::desk() : nplsa::SynthConfig::paper();
    cfg.seed = *a.seed;
    if (a.docs) cfg.n_docs = *a.docs;
    if (a.doc_len) cfg.doc_len = *a.doc_len;
    if (a.topics) cfg.n_topics = *a.topics;
    if (a.vocab) cfg.vocab_size = *a.vocab;
    if (a.alpha) cfg.alpha = *a.alpha;
    if (a.beta) cfg.beta = *a.beta;
    if (a.min_topic_dist) cfg.min_topic_dist = *a.min_topic_dist;
    try {
        cfg.validate();
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    ensure_output_dir(a.out);

    const auto sample = nplsa::generate_corpus(cfg);
    const json config = {{"command", "synth"},
                         {"version", kVersion},
                         {"rng", nplsa::kRngName},
                         {"profile", a.profile},
                         {"seed", cfg.seed},
                         {"n_docs", cfg.n_docs},
                         {"doc_len", cfg.doc_len},
                         {"n_topics", cfg.n_topics},
                         {"vocab_size", cfg.vocab_size},
                         {"alpha", cfg.alpha},
                         {"beta", cfg.beta},
                         {"min_topic_dist", cfg.min_topic_dist}};
    {
        std::ofstream out(fs::path(a.out) / "corpus.txt");
        nplsa::write_sparse(out, sample.corpus);
    }
    nplsa::write_truth((fs::path(a.out) / "truth.json").string(), {sample.corpus.vocab(), sample.truth, config});
    nplsa::write_json_file((fs::path(a.out) / "config.json").string(), config);
    if (a.latent) {
        std::ofstream out(fs::path(a.out) / "latent.txt");
        out << "doc topic word\n";
        for (std::size_t d = 0; d < sample.assignments.size(); ++d) {
            for (const auto& t : sample.assignments[d]) out << d << ' ' << t.topic << ' ' << nplsa::synth_term(t.word) << '\n';
        }
    }
    std::cout << "wrote " << sample.corpus.num_docs() << " documents, " << cfg.n_topics << " topics to " << a.out << '\n';
    return kOk;
}

// ---------------------------------------------------------------- train ---

struct TrainArgs {
    std::string corpus;
    std::string algo;
    std::optional<std::size_t> k;
    std::optional<double> epsilon;
    std::size_t patience = 3;
    std::string query;
    double lambda = 0.5;
    std::size_t query_iters = 50;
    std::size_t topic_cap = 1000;
    std::optional<std::uint64_t> order_seed;
    std::size_t min_df = 1;
    std::string stopwords;
    std::optional<std::uint64_t> seed;
    std::string out;
    bool no_refine = false;
    EmFlags em;
};

int cmd_train(const TrainArgs& a) {
    if (!a.seed) throw UsageError("--seed is required");
    if (a.algo == "plsa" && !a.k) throw UsageError("--algo plsa requires --k");
    if (a.algo == "nplsa" && !a.epsilon) throw UsageError("--algo nplsa requires --epsilon");
    if (a.algo == "query" && split_terms(a.query).empty()) throw UsageError("--algo query requires --query");
    if (a.k && *a.k < 1) throw UsageError("--k must be >= 1");
    if (a.epsilon && !(*a.epsilon > 0.0)) throw UsageError("--epsilon must be > 0");
    const auto em = a.em.to_config(*a.seed);
    try {
        em.validate();
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    require_readable(a.corpus);
    if (!a.stopwords.empty()) require_readable(a.stopwords);
    ensure_output_dir(a.out);

    nplsa::TextOptions text;
    text.min_df = a.min_df;
    if (!a.stopwords.empty()) text.stopwords = nplsa::read_stopwords(a.stopwords);
    const auto corpus = nplsa::read_corpus_file(a.corpus, text);
    if (!corpus.dropped_ids().empty()) {
        nplsa::warn(std::to_string(corpus.dropped_ids().size()) + " documents empty after filtering were dropped");
    }

    nplsa::ModelFile model;
    model.vocab = corpus.vocab();
    nplsa::RunTrace trace;
    std::size_t iters = 0;
    json extra = json::object();

    if (a.algo == "plsa") {
        auto r = nplsa::train_plsa(corpus, *a.k, em);
        model.topics = std::move(r.topics);
        model.mixes = std::move(r.mixes);
        trace = std::move(r.trace);
        iters = r.iterations;
        extra["loglik"] = r.loglik;
    } else if (a.algo == "nplsa") {
        nplsa::NplsaConfig nc;
        nc.epsilon = *a.epsilon;
        nc.topic_cap = a.topic_cap;
        nc.order_seed = a.order_seed;
        auto r = nplsa::train_nplsa(corpus, nc, em);
        model.topics = std::move(r.state.topics);
        model.mixes = std::move(r.state.mixes);
        trace = std::move(r.trace);
        iters = r.sweeps;
        extra["converged"] = r.converged;
        extra["epsilon"] = nc.epsilon;
    } else {
        nplsa::GrowthSettings gs;
        gs.patience = a.patience;
        gs.topic_cap = a.topic_cap;
        gs.refine = !a.no_refine;
        nplsa::GrowthResult r;
        if (a.algo == "auto") {
            r = nplsa::train_parameter_free(corpus, em, gs);
        } else {
            nplsa::QueryModelConfig qc;
            qc.lambda = a.lambda;
            qc.em_iters = a.query_iters;
            const auto terms = split_terms(a.query);
            const auto query = nplsa::estimate_query_model(corpus, terms, qc);
            r = nplsa::train_weakly_supervised(corpus, query, em, gs);
            extra["query"] = terms;
            extra["feedback_docs"] = query.feedback_size;
        }
        model.topics = std::move(r.topics);
        model.mixes = std::move(r.mixes);
        trace = std::move(r.trace);
        iters = trace.rows.size();
        extra["best_k"] = r.best_k;
        extra["best_score"] = r.best_score;
        extra["spawned_docs"] = r.spawned_docs;
    }

    model.meta = {{"K", model.topics.num_topics()}, {"seed", *a.seed}, {"iters", iters}, {"algo", a.algo}};
    model.meta.update(extra);
    nplsa::write_model((fs::path(a.out) / "model.json").string(), model);
    nplsa::write_trace_csv_file((fs::path(a.out) / "trace.csv").string(), trace);

    json config = {{"command", "train"},
                   {"version", kVersion},
                   {"rng", nplsa::kRngName},
                   {"corpus", a.corpus},
                   {"algo", a.algo},
                   {"seed", *a.seed},
                   {"patience", a.patience},
                   {"lambda", a.lambda},
                   {"query_iters", a.query_iters},
                   {"topic_cap", a.topic_cap},
                   {"min_df", a.min_df},
                   {"stopwords", a.stopwords},
                   {"refine", !a.no_refine},
                   {"em", a.em.to_json()}};
    if (a.k) config["k"] = *a.k;
    if (a.epsilon) config["epsilon"] = *a.epsilon;
    if (!a.query.empty()) config["query"] = a.query;
    if (a.order_seed) config["order_seed"] = *a.order_seed;
    nplsa::write_json_file((fs::path(a.out) / "config.json").string(), config);
    std::cout << a.algo << ": K=" << model.topics.num_topics() << " written to " << a.out << '\n';
    return kOk;
}

// ----------------------------------------------------------------- eval ---

struct EvalArgs {
    std::string model;
    std::string heldout;
    std::string truth;
    std::string reference;
    std::size_t top_n = 20;
    double split = 0.8;
    std::optional<std::uint64_t> seed;
    std::string out;
    EmFlags em;
};

int cmd_eval(const EvalArgs& a) {
    if (!a.seed) throw UsageError("--seed is required");
    if (!(a.split > 0.0 && a.split < 1.0)) throw UsageError("--split must lie in (0, 1)");
    if (a.top_n < 2) throw UsageError("--top-n must be >= 2");
    for (const auto* p : {&a.model, &a.heldout, &a.truth, &a.reference}) {
        if (!p->empty()) require_readable(*p);
    }
    fs::path out_path = a.out.empty() ? fs::path("metrics.json") : fs::path(a.out);
    if (fs::is_directory(out_path) || (!a.out.empty() && a.out.back() == '/')) {
        ensure_output_dir(out_path.string());
        out_path /= "metrics.json";
    }

    const auto model = nplsa::read_model(a.model);
    const auto em = a.em.to_config(*a.seed);
    json report = {{"K", model.topics.num_topics()}, {"tqe", nullptr},       {"tce", nullptr},
                   {"pmi", nullptr},                {"perplexity", nullptr}, {"diversity", nullptr}};
    report["diversity"] = model.topics.num_topics() >= 2 ? nplsa::diversity(model.topics).value : 0.0;

    if (!a.truth.empty()) {
        const auto truth = nplsa::read_truth(a.truth);
        const auto aligned = nplsa::align_topics(model.topics, model.vocab, truth.vocab);
        report["tqe"] = nplsa::topic_quality_error(aligned, truth.truth);
        report["tce"] = nplsa::topic_coverage_error(aligned, truth.truth);
    }
    if (!a.heldout.empty()) {
        std::uint64_t dropped = 0;
        const auto held = nplsa::align_corpus(nplsa::read_corpus_file(a.heldout), model.vocab, &dropped);
        if (dropped > 0) nplsa::warn(std::to_string(dropped) + " held-out tokens outside the model vocabulary ignored");
        report["perplexity"] = nplsa::perplexity(held, model.topics, a.split, em).perplexity;
    }
    if (!a.reference.empty()) {
        const auto stats = nplsa::CooccurrenceStats::from_corpus(nplsa::read_corpus_file(a.reference));
        report["pmi"] = nplsa::pmi_coherence(model.topics, model.vocab, stats, {a.top_n});
    }
    nplsa::write_json_file(out_path.string(), report);
    std::cout << report.dump() << '\n';
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Nonparametric PLSA topic modeling toolkit"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    SynthArgs synth;
    auto* s = app.add_subcommand("synth", "generate a synthetic corpus with known topics");
    std::string config_file;  // consumed by expand_config; registered for --help
    s->add_option("--config", config_file, "key=value config file; flags override it");
    s->add_option("--profile", synth.profile, "parameter profile")->check(CLI::IsMember({"paper", "desk"}));
    s->add_option("--seed", synth.seed, "random seed (required)");
    s->add_option("--docs", synth.docs, "number of documents");
    s->add_option("--doc-len", synth.doc_len, "tokens per document");
    s->add_option("--topics", synth.topics, "number of true topics");
    s->add_option("--vocab", synth.vocab, "vocabulary size");
    s->add_option("--alpha", synth.alpha, "Dirichlet parameter of document mixes");
    s->add_option("--beta", synth.beta, "Dirichlet parameter of topic rows");
    s->add_option("--min-topic-dist", synth.min_topic_dist, "L2 distinctness threshold between true topics");
    s->add_option("--out", synth.out, "output directory")->required();
    s->add_flag("--latent", synth.latent, "also write per-token latent assignments");

    TrainArgs train;
    auto* t = app.add_subcommand("train", "train a topic model");
    t->add_option("--config", config_file, "key=value config file; flags override it");
    t->add_option("--corpus", train.corpus, "text (one document per line) or sparse corpus")->required();
    t->add_option("--algo", train.algo, "plsa | nplsa | auto | query")
        ->required()
        ->check(CLI::IsMember({"plsa", "nplsa", "auto", "query"}));
    t->add_option("--k", train.k, "number of topics (plsa)");
    t->add_option("--epsilon", train.epsilon, "spawn threshold in nats (nplsa)");
    t->add_option("--patience", train.patience, "spawns without improvement before stopping (auto, query)")
        ->check(CLI::PositiveNumber);
    t->add_option("--query", train.query, "whitespace-separated query terms (query)");
    t->add_option("--lambda", train.lambda, "query model weight in the feedback mixture");
    t->add_option("--query-iters", train.query_iters, "feedback EM budget");
    t->add_option("--topic-cap", train.topic_cap, "abort when K would exceed this");
    t->add_option("--order-seed", train.order_seed, "visit documents in a seeded shuffled order (nplsa)");
    t->add_option("--min-df", train.min_df, "drop terms in fewer documents (text input)")->check(CLI::PositiveNumber);
    t->add_option("--stopwords", train.stopwords, "stopword file, one term per line");
    t->add_option("--seed", train.seed, "random seed (required)");
    t->add_option("--out", train.out, "output directory")->required();
    t->add_flag("--no-refine", train.no_refine, "skip the final EM refinement (auto, query)");
    add_em_flags(t, train.em);

    EvalArgs eval;
    auto* e = app.add_subcommand("eval", "evaluate a trained model");
    e->add_option("--config", config_file, "key=value config file; flags override it");
    e->add_option("--model", eval.model, "model.json")->required();
    e->add_option("--heldout", eval.heldout, "held-out corpus for perplexity");
    e->add_option("--truth", eval.truth, "truth.json for topic quality/coverage error");
    e->add_option("--reference", eval.reference, "reference corpus for PMI coherence");
    e->add_option("--top-n", eval.top_n, "top words per topic for PMI");
    e->add_option("--split", eval.split, "observed fraction of each held-out document");
    e->add_option("--seed", eval.seed, "random seed (required)");
    e->add_option("--out", eval.out, "metrics file or directory");
    add_em_flags(e, eval.em);

    for (auto* sub : {s, t, e}) {
        for (auto* opt : sub->get_options()) opt->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    }

    try {
        auto args = expand_config(argc, argv);
        std::reverse(args.begin(), args.end());  // CLI11 consumes from the back
        app.parse(args);
    } catch (const CLI::ParseError& err) {
        const int code = app.exit(err);
        return code == 0 ? kOk : kUsage;
    } catch (const UsageError& err) {
        std::cerr << "usage error: " << err.what() << '\n';
        return kUsage;
    } catch (const nplsa::DataError& err) {
        std::cerr << "data error: " << err.what() << '\n';
        return kData;
    }

    try {
        if (*s) return cmd_synth(synth);
        if (*t) return cmd_train(train);
        if (*e) return cmd_eval(eval);
    } catch (const UsageError& err) {
        std::cerr << "usage error: " << err.what() << '\n';
        return kUsage;
    } catch (const nplsa::DataError& err) {
        std::cerr << "data error: " << err.what() << '\n';
        return kData;
    } catch (const nplsa::AlgorithmError& err) {
        std::cerr << "error: " << err.what() << '\n';
        return kAlgorithm;
    } catch (const std::invalid_argument& err) {
        std::cerr << "usage error: " << err.what() << '\n';
        return kUsage;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << '\n';
        return kData;
    }
    return kUsage;
}
