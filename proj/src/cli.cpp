#include "sqa/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "sqa/align.hpp"
#include "sqa/analysis.hpp"
#include "sqa/augment.hpp"
#include "sqa/corpus.hpp"
#include "sqa/decode.hpp"
#include "sqa/error.hpp"
#include "sqa/metrics.hpp"
#include "sqa/output.hpp"
#include "sqa/parallel.hpp"

namespace sqa::cli {

namespace {

// Everything a subcommand can be configured with.
struct RunConfig {
    std::string input;
    std::string output = "-";
    std::string format;
    unsigned jobs = 1;
    std::size_t max_answer_tokens = 30;
    double null_threshold = 0.0;
    std::string tos_mode = "set";
    bool include_reference = false;
    std::vector<std::string> pivots = {"fr", "de"};
    std::string marker;
    std::vector<std::string> seeds;

    std::string corpus;
    std::string predictions;
    std::string hypothesis;
    std::string per_sample;
    std::string dump;
    std::string translator;
    std::string tts;
    std::string provenance;
    std::string points;
    std::vector<std::string> systems;
    double fuzzy_threshold = 0.8;
    std::size_t window_slack = 2;
};

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Writes either to `out` (path "-") or to an all-or-nothing file set.
class Sink {
public:
    Sink(std::string path, std::ostream& out) : path_(std::move(path)), out_(out) {}

    std::ostream& stream() {
        if (path_.empty() || path_ == "-") {
            return out_;
        }
        if (file_ == nullptr) {
            file_ = &files_.open(path_);
        }
        return *file_;
    }

    void commit() { files_.commit(); }

private:
    std::string path_;
    std::ostream& out_;
    OutputSet files_;
    std::ostream* file_ = nullptr;
};

std::vector<ResponseRecord> load_corpus(const RunConfig& cfg, const std::string& path,
                                        std::ostream& err) {
    auto records = load_sqa_corpus(path);
    if (!cfg.marker.empty()) {
        const auto before = records.size();
        records = filter_unclear(records, cfg.marker);
        fmt::print(err, "{}: removed {} of {} records containing '{}'\n", path,
                   before - records.size(), before, cfg.marker);
    }
    return records;
}

// Fills in word spans from character spans using the response passage.
void map_to_words(SpanPrediction& p, const ResponseRecord& record) {
    if (p.word_span || !p.char_span) {
        return;
    }
    const auto passage = join_words(record.word_texts());
    p.word_span = tokens_to_words(*p.char_span, passage.word_offsets);
}

// ---------------------------------------------------------------------------

int cmd_validate(const RunConfig& cfg, std::ostream&, std::ostream& err) {
    std::size_t count = 0;
    const std::string format = cfg.format.empty() ? "sqa" : cfg.format;
    if (format == "sqa") {
        count = load_sqa_corpus(cfg.input).size();
    } else if (format == "squad") {
        count = load_squad(cfg.input).size();
    } else if (format == "logits") {
        count = load_logits(cfg.input).size();
    } else if (format == "predictions") {
        count = load_predictions(cfg.input).size();
    } else if (format == "transcripts") {
        count = load_transcript_map(cfg.input).size();
    } else if (format == "points") {
        std::ifstream in(cfg.input);
        if (!in) {
            throw Error(fmt::format("cannot open '{}'", cfg.input));
        }
        count = parse_system_points_csv(in).size();
    } else {
        throw UsageError(fmt::format("unknown --format '{}'", format));
    }
    fmt::print(err, "{}: valid {} file, {} entries\n", cfg.input, format, count);
    return kOk;
}

int cmd_stats(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const auto records = load_corpus(cfg, cfg.input, err);
    Sink sink(cfg.output, out);
    write_stats_csv(sink.stream(), corpus_stats(records));
    sink.commit();
    return kOk;
}

int cmd_decode(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const auto logits = load_logits(cfg.input);
    const std::set<std::string> wanted(cfg.seeds.begin(), cfg.seeds.end());

    std::vector<std::string> order;
    std::map<std::string, std::vector<TokenLogits>> groups;
    for (const auto& l : logits) {
        if (!wanted.empty() && !wanted.contains(l.seed_id)) {
            continue;
        }
        auto [it, inserted] = groups.try_emplace(l.sample_id);
        if (inserted) {
            order.push_back(l.sample_id);
        }
        it->second.push_back(l);
    }

    std::map<std::string, const ResponseRecord*> records;
    std::vector<ResponseRecord> corpus;
    if (!cfg.corpus.empty()) {
        corpus = load_sqa_corpus(cfg.corpus);
        for (const auto& r : corpus) {
            records.emplace(r.id, &r);
        }
    }

    DecodeOptions options;
    options.max_answer_tokens = cfg.max_answer_tokens;
    options.null_threshold = cfg.null_threshold;
    std::vector<SpanPrediction> predictions(order.size());
    parallel_for(order.size(), cfg.jobs, [&](std::size_t i) {
        const auto& seeds = groups.at(order[i]);
        auto p = decode_span(ensemble(seeds), options);
        if (!records.empty()) {
            const auto it = records.find(p.sample_id);
            if (it == records.end()) {
                throw ValidationError(fmt::format("sample '{}' not found in corpus", p.sample_id));
            }
            map_to_words(p, *it->second);
        }
        predictions[i] = std::move(p);
    });
    std::size_t abstained = 0;
    for (const auto& p : predictions) {
        abstained += p.is_no_answer() ? 1 : 0;
    }
    fmt::print(err, "decoded {} samples ({} no-answer) from {} logit records\n", predictions.size(),
               abstained, logits.size());
    Sink sink(cfg.output, out);
    write_predictions(sink.stream(), predictions);
    sink.commit();
    return kOk;
}

int cmd_eval_squad(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const auto samples = load_squad(cfg.input);
    const auto predictions = load_predictions(cfg.predictions);
    std::map<std::string, const SpanPrediction*> by_id;
    for (const auto& p : predictions) {
        by_id[p.sample_id] = &p;
    }
    struct Totals {
        std::size_t n = 0;
        double em = 0.0;
        double f1 = 0.0;
    };
    Totals all;
    Totals has_answer;
    Totals no_answer;
    std::size_t missing = 0;
    for (const auto& s : samples) {
        std::string text;
        if (const auto it = by_id.find(s.id); it != by_id.end()) {
            if (it->second->char_span) {
                text = utf8_substr(s.passage, *it->second->char_span);
            }
        } else {
            ++missing;
        }
        std::vector<std::string> golds;
        for (const auto& a : s.gold_answers) {
            golds.push_back(a.text);
        }
        const double em = squad_em(text, golds);
        const double f1 = squad_f1(text, golds);
        for (auto* t : {&all, s.is_impossible ? &no_answer : &has_answer}) {
            ++t->n;
            t->em += em;
            t->f1 += f1;
        }
    }
    if (missing > 0) {
        fmt::print(err, "warning: {} samples had no prediction and were scored as no-answer\n", missing);
    }
    Sink sink(cfg.output, out);
    auto& csv = sink.stream();
    csv << "subset,n,em,f1\n";
    for (const auto& [name, t] : {std::pair{"all", all}, std::pair{"has_answer", has_answer},
                                  std::pair{"no_answer", no_answer}}) {
        const double n = t.n > 0 ? static_cast<double>(t.n) : 1.0;
        fmt::print(csv, "{},{},{},{}\n", name, t.n, 100.0 * t.em / n, 100.0 * t.f1 / n);
    }
    sink.commit();
    return kOk;
}

int cmd_eval(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    if (cfg.format == "squad") {
        return cmd_eval_squad(cfg, out, err);
    }
    if (!cfg.format.empty() && cfg.format != "sqa") {
        throw UsageError(fmt::format("eval: unknown --format '{}'", cfg.format));
    }
    const auto records = load_corpus(cfg, cfg.input, err);
    auto predictions = load_predictions(cfg.predictions);
    std::map<std::string, SpanPrediction*> by_id;
    for (auto& p : predictions) {
        by_id[p.sample_id] = &p;
    }

    std::vector<EvalItem> items;
    std::vector<std::string> mapping_errors;
    for (const auto& r : records) {
        const auto it = by_id.find(r.id);
        if (it == by_id.end()) {
            throw ValidationError(fmt::format("no prediction for sample '{}'", r.id));
        }
        EvalItem item;
        item.sample = SqaSample::from_record(r);
        try {
            map_to_words(*it->second, r);
        } catch (const ValidationError& e) {
            mapping_errors.push_back(fmt::format("sample '{}': {}", r.id, e.what()));
        }
        item.predicted = it->second->word_span;
        items.push_back(std::move(item));
    }
    if (!mapping_errors.empty()) {
        throw ValidationError(mapping_errors.front());
    }

    EvalOptions options;
    options.tos_mode = parse_tos_mode(cfg.tos_mode);
    options.jobs = cfg.jobs;
    const auto report = evaluate_corpus(items, options);
    for (const auto& e : report.errors) {
        fmt::print(err, "excluded {}\n", e);
    }

    Sink sink(cfg.output, out);
    write_report_csv(sink.stream(), report);
    std::unique_ptr<Sink> samples;
    if (!cfg.per_sample.empty()) {
        samples = std::make_unique<Sink>(cfg.per_sample, out);
        write_sample_scores_csv(samples->stream(), report);
    }
    sink.commit();
    if (samples) {
        samples->commit();
    }
    return kOk;
}

// Reference and hypothesis records paired by id, in reference order.
std::vector<std::pair<const ResponseRecord*, const ResponseRecord*>> pair_records(
    const std::vector<ResponseRecord>& ref, const std::vector<ResponseRecord>& hyp) {
    std::map<std::string, const ResponseRecord*> by_id;
    for (const auto& h : hyp) {
        by_id.emplace(h.id, &h);
    }
    std::vector<std::pair<const ResponseRecord*, const ResponseRecord*>> out;
    for (const auto& r : ref) {
        const auto it = by_id.find(r.id);
        if (it == by_id.end()) {
            throw ValidationError(fmt::format("hypothesis has no record '{}'", r.id));
        }
        out.emplace_back(&r, it->second);
    }
    if (by_id.size() != out.size()) {
        throw ValidationError("hypothesis contains records missing from the reference");
    }
    return out;
}

int cmd_wer(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const auto ref = load_corpus(cfg, cfg.input, err);
    const auto hyp = load_sqa_corpus(cfg.hypothesis);
    const auto pairs = pair_records(ref, hyp);
    std::vector<WerBreakdown> rows(pairs.size());
    parallel_for(pairs.size(), cfg.jobs, [&](std::size_t i) {
        rows[i] = wer(pairs[i].first->word_texts(), pairs[i].second->word_texts());
    });
    Sink sink(cfg.output, out);
    auto& csv = sink.stream();
    csv << "id,substitutions,deletions,insertions,ref_length,wer\n";
    WerBreakdown total;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& b = rows[i];
        fmt::print(csv, "{},{},{},{},{},{}\n", pairs[i].first->id, b.substitutions, b.deletions,
                   b.insertions, b.ref_length, b.wer);
        total += b;
    }
    fmt::print(csv, "all,{},{},{},{},{}\n", total.substitutions, total.deletions, total.insertions,
               total.ref_length, total.wer);
    sink.commit();
    fmt::print(err, "corpus WER {:.2f}% over {} records\n", 100.0 * total.wer, rows.size());
    return kOk;
}

int cmd_align(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const auto ref = load_corpus(cfg, cfg.input, err);
    const auto hyp = load_sqa_corpus(cfg.hypothesis);
    const auto pairs = pair_records(ref, hyp);
    std::vector<ResponseRecord> timed(pairs.size());
    std::vector<std::string> dumps(pairs.size());
    parallel_for(pairs.size(), cfg.jobs, [&](std::size_t i) {
        const auto& [r, h] = pairs[i];
        const auto hyp_words = h->word_texts();
        timed[i] = *h;
        timed[i].words = transfer_times(r->words, hyp_words);
        if (!cfg.dump.empty()) {
            const auto ref_words = r->word_texts();
            dumps[i] = fmt::format("# {}\n{}", r->id,
                                   format_alignment(word_edit_alignment(ref_words, hyp_words), ref_words,
                                                    hyp_words));
        }
    });
    for (const auto& t : timed) {
        validate_record(t);
    }
    Sink sink(cfg.output, out);
    write_sqa_corpus(sink.stream(), timed);
    std::unique_ptr<Sink> dump;
    if (!cfg.dump.empty()) {
        dump = std::make_unique<Sink>(cfg.dump, out);
        for (const auto& d : dumps) {
            dump->stream() << d;
        }
    }
    sink.commit();
    if (dump) {
        dump->commit();
    }
    return kOk;
}

int cmd_augment(const RunConfig& cfg, std::ostream&, std::ostream& err) {
    if (cfg.provenance.empty() || cfg.output.empty() || cfg.output == "-") {
        throw UsageError("augment needs --output and --provenance files");
    }
    const auto base = load_squad(cfg.input);
    AugmentConfig config;
    config.pivots = cfg.pivots;
    config.relocation.fuzzy_threshold = cfg.fuzzy_threshold;
    config.relocation.window_slack = cfg.window_slack;
    config.jobs = cfg.jobs;
    std::unique_ptr<TranslationClient> client;
    if (cfg.translator.empty()) {
        config.back_translation = false;
    } else if (cfg.translator == "identity") {
        client = std::make_unique<IdentityTranslationClient>();
    } else {
        client = std::make_unique<HttpTranslationClient>(cfg.translator);
    }
    if (!cfg.tts.empty()) {
        config.tts_transcripts = load_transcript_map(cfg.tts);
    }
    if (!config.back_translation && !config.tts_transcripts) {
        throw UsageError("augment needs --translator and/or --tts");
    }
    const auto result = build_augmented_set(base, config, client.get());
    for (const auto& w : result.warnings) {
        fmt::print(err, "warning: {}\n", w);
    }
    for (const auto& r : result.reports) {
        fmt::print(err, "{}: retained {}/{} answerable ({:.1f}%), {} unanswerable, {} failed\n",
                   r.generator, r.retained, r.attempted, 100.0 * r.retention(), r.unanswerable,
                   r.failed);
    }
    OutputSet files;
    write_augmented(files.open(cfg.output), files.open(cfg.provenance), result.samples);
    files.commit();
    return kOk;
}

int cmd_analyze(const RunConfig& cfg, std::ostream&, std::ostream& err) {
    if (cfg.output.empty() || cfg.output == "-") {
        throw UsageError("analyze needs --output <directory>");
    }
    std::vector<SystemPoint> points;
    if (!cfg.points.empty()) {
        std::ifstream in(cfg.points);
        if (!in) {
            throw Error(fmt::format("cannot open '{}'", cfg.points));
        }
        points = parse_system_points_csv(in);
    } else {
        if (cfg.input.empty() || cfg.systems.empty()) {
            throw UsageError("analyze needs --points, or --input with one or more --system");
        }
        const auto reference = load_corpus(cfg, cfg.input, err);
        std::set<std::string> kept;
        for (const auto& r : reference) {
            kept.insert(r.id);
        }
        std::vector<SystemTranscripts> systems;
        for (const auto& spec : cfg.systems) {
            const auto eq = spec.find('=');
            const auto comma = spec.find(',', eq == std::string::npos ? 0 : eq);
            if (eq == std::string::npos || comma == std::string::npos) {
                throw UsageError(fmt::format("--system '{}' is not NAME=TRANSCRIPTS,PREDICTIONS", spec));
            }
            SystemTranscripts s;
            s.name = spec.substr(0, eq);
            for (auto& t : load_sqa_corpus(spec.substr(eq + 1, comma - eq - 1))) {
                if (kept.contains(t.id)) {
                    s.transcripts.push_back(std::move(t));
                }
            }
            auto predictions = load_predictions(spec.substr(comma + 1));
            std::map<std::string, const ResponseRecord*> by_id;
            for (const auto& t : s.transcripts) {
                by_id.emplace(t.id, &t);
            }
            for (auto& p : predictions) {
                if (!kept.contains(p.sample_id)) {
                    continue;
                }
                if (const auto it = by_id.find(p.sample_id); it != by_id.end()) {
                    map_to_words(p, *it->second);
                }
                s.predictions[p.sample_id] = p.word_span;
            }
            systems.push_back(std::move(s));
        }
        EvalOptions options;
        options.tos_mode = parse_tos_mode(cfg.tos_mode);
        options.jobs = cfg.jobs;
        points = build_system_points(reference, systems, options);
    }
    std::vector<DegradationFit> fits;
    for (const auto metric : {Metric::Tos, Metric::Aos}) {
        fits.push_back(fit_degradation(points, metric, cfg.include_reference));
        const auto& f = fits.back();
        fmt::print(err, "{}: slope {:.3f} per WER point, intercept {:.2f}, r^2 {:.3f} ({} points)\n",
                   to_string(metric), f.slope, f.intercept, f.r_squared, f.n_points);
    }
    const auto files = emit_report(points, fits, cfg.output);
    for (const auto& w : files.warnings) {
        fmt::print(err, "warning: {}\n", w);
    }
    return kOk;
}

// ---------------------------------------------------------------------------
// Config files: flat "key = value" lines, '#' comments. Keys are long option
// names without dashes.

std::vector<std::pair<std::string, std::string>> read_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw UsageError(fmt::format("cannot read config file '{}'", path));
    }
    std::vector<std::pair<std::string, std::string>> entries;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) {
            line.erase(hash);
        }
        const auto strip = [](std::string s) {
            const auto a = s.find_first_not_of(" \t\r");
            const auto b = s.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        line = strip(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw UsageError(fmt::format("{}:{}: expected key = value", path, line_no));
        }
        auto value = strip(line.substr(eq + 1));
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
            value = value.substr(1, value.size() - 2);
        }
        entries.emplace_back(strip(line.substr(0, eq)), value);
    }
    return entries;
}

struct Command {
    CLI::App* app = nullptr;
    int (*handler)(const RunConfig&, std::ostream&, std::ostream&) = nullptr;
};

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    RunConfig cfg;
    CLI::App app{"Spoken question answering evaluation toolkit", "sqa"};
    app.require_subcommand(1);
    app.fallthrough();
    std::string config_path;
    app.add_option("--config", config_path, "Flat key = value config file")->envname(kConfigEnv);

    std::map<std::string, Command> commands;
    const auto add = [&](const char* name, const char* help, auto handler) {
        auto* sub = app.add_subcommand(name, help);
        commands[name] = {sub, handler};
        return sub;
    };
    const auto common = [&](CLI::App* sub) {
        sub->add_option("--jobs", cfg.jobs, "Worker threads")->check(CLI::PositiveNumber);
        sub->add_option("--marker", cfg.marker, "Drop records containing this word (e.g. unclear)");
    };

    auto* validate = add("validate", "Parse and validate an input file", cmd_validate);
    validate->add_option("--input", cfg.input)->required();
    validate->add_option("--format", cfg.format, "sqa|squad|logits|predictions|transcripts|points");
    common(validate);

    auto* stats = add("stats", "Per-section corpus statistics", cmd_stats);
    stats->add_option("--input", cfg.input)->required();
    stats->add_option("--output", cfg.output);
    common(stats);

    auto* decode = add("decode", "Ensemble seed logits and decode answer spans", cmd_decode);
    decode->add_option("--input", cfg.input, "Logits file")->required();
    decode->add_option("--corpus", cfg.corpus, "SQA corpus for mapping spans to words");
    decode->add_option("--output", cfg.output);
    decode->add_option("--max-answer-tokens", cfg.max_answer_tokens)->check(CLI::PositiveNumber);
    decode->add_option("--null-threshold", cfg.null_threshold);
    decode->add_option("--seeds", cfg.seeds, "Seed ids to ensemble (default: all)")->delimiter(',');
    common(decode);

    auto* eval = add("eval", "Score predictions (TOS/AOS, or EM/F1 with --format squad)", cmd_eval);
    eval->add_option("--input", cfg.input, "SQA corpus or SQuAD file")->required();
    eval->add_option("--predictions", cfg.predictions)->required();
    eval->add_option("--output", cfg.output);
    eval->add_option("--per-sample", cfg.per_sample, "Per-sample score CSV");
    eval->add_option("--format", cfg.format, "sqa|squad");
    eval->add_option("--tos-mode", cfg.tos_mode)->check(CLI::IsMember({"set", "multiset"}));
    common(eval);

    auto* wer_cmd = add("wer", "Word error rate of hypothesis against reference", cmd_wer);
    wer_cmd->add_option("--input", cfg.input, "Reference SQA corpus")->required();
    wer_cmd->add_option("--hypothesis", cfg.hypothesis)->required();
    wer_cmd->add_option("--output", cfg.output);
    common(wer_cmd);

    auto* align = add("align", "Transfer reference word times onto hypothesis words", cmd_align);
    align->add_option("--input", cfg.input, "Timed reference SQA corpus")->required();
    align->add_option("--hypothesis", cfg.hypothesis)->required();
    align->add_option("--output", cfg.output);
    align->add_option("--dump", cfg.dump, "Three-row alignment text");
    common(align);

    auto* augment = add("augment", "Build a back-translation / TTS-ASR augmented SQuAD set", cmd_augment);
    augment->add_option("--input", cfg.input, "SQuAD 2.0 file")->required();
    augment->add_option("--output", cfg.output)->required();
    augment->add_option("--provenance", cfg.provenance)->required();
    augment->add_option("--format", cfg.format, "Output format (squad)")->check(CLI::IsMember({"squad"}));
    augment->add_option("--pivots", cfg.pivots)->delimiter(',');
    augment->add_option("--translator", cfg.translator, "identity or http://host:port/path");
    augment->add_option("--tts", cfg.tts, "TTS-ASR transcript mapping file");
    augment->add_option("--fuzzy-threshold", cfg.fuzzy_threshold)->check(CLI::Range(0.0, 1.0));
    augment->add_option("--window-slack", cfg.window_slack);
    common(augment);

    auto* analyze = add("analyze", "Fit TOS/AOS degradation against WER", cmd_analyze);
    analyze->add_option("--input", cfg.input, "Reference SQA corpus");
    analyze->add_option("--system", cfg.systems, "NAME=TRANSCRIPTS,PREDICTIONS (repeatable)");
    analyze->add_option("--points", cfg.points, "system,wer,tos,aos CSV instead of corpora");
    analyze->add_option("--output", cfg.output, "Report directory")->required();
    analyze->add_flag("--include-reference", cfg.include_reference);
    analyze->add_option("--tos-mode", cfg.tos_mode)->check(CLI::IsMember({"set", "multiset"}));
    common(analyze);

    std::vector<std::string> argv = args;
    try {
        // Config values are injected as flags unless already given on the
        // command line, so flags win over the file and the file over defaults.
        std::string cfg_file;
        for (std::size_t i = 0; i + 1 < argv.size(); ++i) {
            if (argv[i] == "--config") {
                cfg_file = argv[i + 1];
            } else if (argv[i].starts_with("--config=")) {
                cfg_file = argv[i].substr(9);
            }
        }
        if (cfg_file.empty()) {
            if (const char* env = std::getenv(kConfigEnv); env != nullptr) {
                cfg_file = env;
            }
        }
        if (!cfg_file.empty() && !argv.empty() && commands.contains(argv.front())) {
            auto* sub = commands.at(argv.front()).app;
            for (const auto& [key, value] : read_config(cfg_file)) {
                const std::string flag = "--" + key;
                CLI::Option* opt = nullptr;
                try {
                    opt = sub->get_option(flag);
                } catch (const CLI::OptionNotFound&) {
                    bool known = false;
                    for (const auto& [name, c] : commands) {
                        known = known || c.app->get_option_no_throw(flag) != nullptr;
                    }
                    if (!known) {
                        throw UsageError(fmt::format("{}: unknown config key '{}'", cfg_file, key));
                    }
                    continue;
                }
                const bool given = std::any_of(argv.begin(), argv.end(), [&](const std::string& a) {
                    return a == flag || a.starts_with(flag + "=");
                });
                if (given) {
                    continue;
                }
                if (opt->get_type_size() == 0) {
                    if (value == "true" || value == "1") {
                        argv.push_back(flag);
                    }
                } else {
                    argv.push_back(flag);
                    argv.push_back(value);
                }
            }
        }

        std::vector<std::string> reversed(argv.rbegin(), argv.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return kUsageError;
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return kUsageError;
    }

    for (const auto& [name, command] : commands) {
        if (!command.app->parsed()) {
            continue;
        }
        try {
            return command.handler(cfg, out, err);
        } catch (const UsageError& e) {
            err << "error: " << e.what() << '\n';
            return kUsageError;
        } catch (const std::exception& e) {
            err << "error: " << e.what() << '\n';
            return kValidationFailure;
        }
    }
    err << app.help();
    return kUsageError;
}

} // namespace sqa::cli
