// Licensed under the Apache License, Version 2.0 (the 'License');
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an 'AS IS' BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
// Copyright 2026 The capbias Authors.
// The capbias command line: subcommands, report writers and run manifests.

#pragma once

#include <charconv>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "capbias/capbias.hpp"
#include "capbias/hash.hpp"
#include "capbias/parallel.hpp"
#include "json.hpp"

namespace capbias::cli {

inline constexpr std::string_view kToolVersion = "0.1.0";

inline std::string fmt_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

// Provenance carried in every report header.
struct ReportMeta {
  std::string tool = "capbias " + std::string(kToolVersion);
  std::string report;
  std::string corpus_hash;
  std::string split;
  std::string lexicon_version;

  std::string tsv_header() const {
    std::ostringstream os;
    os << "# " << tool << ' ' << report << '\n'
       << "# corpus_hash=" << corpus_hash << '\n'
       << "# split=" << split << '\n'
       << "# lexicon=" << lexicon_version << '\n';
    return os.str();
  }

  nlohmann::json json() const {
    return {{"tool", tool},
            {"report", report},
            {"corpus_hash", corpus_hash},
            {"split", split},
            {"lexicon", lexicon_version}};
  }
};

// Side data about one invocation, written next to each output artifact.
struct RunManifest {
  std::string subcommand;
  std::map<std::string, std::string> parameters;
  std::vector<std::string> input_paths;
  std::string lexicon_version;

  nlohmann::json json() const {
    nlohmann::json inputs = nlohmann::json::array();
    for (const auto& p : input_paths)
      inputs.push_back({{"path", p}, {"sha256", sha256_hex(read_file(p))}});
    const auto now = std::chrono::system_clock::to_time_t(
        std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char ts[32];
    std::strftime(ts, sizeof ts, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return {{"subcommand", subcommand},
            {"parameters", parameters},
            {"inputs", inputs},
            {"lexicon_version", lexicon_version},
            {"tool_version", kToolVersion},
            {"timestamp", ts}};
  }
};

struct Options {
  std::vector<std::string> captions;
  std::vector<std::string> instances;
  std::string split_path;
  std::string split_name = "train";
  std::optional<std::string> lexicon;
  std::string out;
  std::string edits;
  std::string format = "tsv";
  std::string number = "singular";
  std::string pred;
  std::string labels;
  std::string refs;
  std::string profile_split = "train";
  std::string eval_split = "test";
  std::size_t top_k = 100;
  std::uint64_t min_count = 20;
  unsigned threads = default_threads();
  bool force = false;
  bool child_words = false;
  bool neutral_refs = false;
};

class Runner {
 public:
  Runner(Options opt, std::ostream& out, std::ostream& log)
      : opt_(std::move(opt)), out_(out), log_(log) {}

  int ingest_check() {
    Corpus c = corpus();
    nlohmann::json j = {
        {"meta", meta("ingest-check", c, std::nullopt).json()},
        {"images",
         {{"train", c.count(Split::train)},
          {"val", c.count(Split::val)},
          {"test", c.count(Split::test)}}},
        {"captions", c.captions().size()},
        {"person_instances", c.instances().size()},
        {"dropped",
         {{"images_not_in_split", c.load_stats().images_not_in_split},
          {"captions_of_dropped_images",
           c.load_stats().captions_of_dropped_images},
          {"split_ids_without_image", c.load_stats().split_ids_without_image},
          {"non_person_instances", c.load_stats().non_person_instances},
          {"instances_of_dropped_images",
           c.load_stats().instances_of_dropped_images},
          {"degenerate_instances", c.load_stats().degenerate_instances}}}};
    const std::string text = j.dump(2) + "\n";
    if (opt_.out.empty()) {
      out_ << text;
      return 0;
    }
    preflight({opt_.out});
    write(opt_.out, text);
    finish("ingest-check", c_inputs(), "");
    return 0;
  }

  int neutralize() {
    std::vector<std::string> outs{opt_.out};
    if (!opt_.edits.empty()) outs.push_back(opt_.edits);
    preflight(outs);
    Lexicon lex = lexicon();
    Corpus c = corpus();
    std::optional<Split> filter;
    if (opt_.split_name != "all") filter = split(opt_.split_name);
    NeutralizedCorpus nc = neutralize_corpus(lex, c, filter, opt_.threads);
    write(opt_.out, to_coco_json(nc).dump() + "\n");
    if (!opt_.edits.empty()) write(opt_.edits, edit_report_tsv(nc));
    log_ << "neutralize: " << nc.captions.size() << " captions, "
         << nc.records.size() << " rewritten, " << nc.total_edits
         << " edits\n";
    for (const auto& [cls, n] : nc.edits_by_class)
      log_ << "  " << to_string(cls) << ": " << n << '\n';
    finish("neutralize", c_inputs(), lex.version());
    return 0;
  }

  int stats_bias() {
    preflight({opt_.out});
    Lexicon lex = lexicon();
    Corpus c = corpus();
    const Split s = split(opt_.split_name);
    BiasProfile p = build_bias_profile(lex, c, s, opt_.threads);
    ReportMeta m = meta("stats bias", c, lex.version());
    std::ostringstream os;
    if (opt_.format == "json") {
      nlohmann::json words = nlohmann::json::array();
      for (const auto& [w, wc] : p.words)
        words.push_back({{"word", w},
                         {"c_male", wc.male},
                         {"c_female", wc.female},
                         {"bias_male", *wc.bias_male()}});
      os << nlohmann::json{{"meta", m.json()},
                           {"male_captions", p.male_captions},
                           {"female_captions", p.female_captions},
                           {"words", words}}
                .dump(2)
         << '\n';
    } else {
      os << m.tsv_header() << "# male_captions=" << p.male_captions << '\n'
         << "# female_captions=" << p.female_captions << '\n'
         << "word\tc_male\tc_female\tbias_male\n";
      for (const auto& [w, wc] : p.words)
        os << w << '\t' << wc.male << '\t' << wc.female << '\t'
           << fmt_double(*wc.bias_male()) << '\n';
    }
    write(opt_.out, os.str());
    finish("stats bias", c_inputs(), lex.version());
    return 0;
  }

  int stats_census() {
    preflight({opt_.out});
    Lexicon lex = lexicon();
    Corpus c = corpus();
    ConflictCensus cc =
        conflict_census(lex, c, split(opt_.split_name), opt_.threads);
    ReportMeta m = meta("stats census", c, lex.version());
    std::ostringstream os;
    if (opt_.format == "json") {
      nlohmann::json cells = nlohmann::json::array();
      for (const auto& [k, v] : cc.cells)
        cells.push_back({{"male", k.male},
                         {"female", k.female},
                         {"neutral", k.neutral},
                         {"images", v}});
      os << nlohmann::json{{"meta", m.json()},
                           {"single_person_images", cc.single_person_images},
                           {"conflict_images", cc.conflict_images},
                           {"nonstandard_conflict_images",
                            cc.nonstandard_conflict_images},
                           {"cells", cells}}
                .dump(2)
         << '\n';
    } else {
      os << m.tsv_header()
         << "# single_person_images=" << cc.single_person_images << '\n'
         << "# conflict_images=" << cc.conflict_images << '\n'
         << "# nonstandard_conflict_images=" << cc.nonstandard_conflict_images
         << '\n'
         << "male\tfemale\tneutral\timages\n";
      for (const auto& [k, v] : cc.cells)
        os << k.male << '\t' << k.female << '\t' << k.neutral << '\t' << v
           << '\n';
    }
    write(opt_.out, os.str());
    finish("stats census", c_inputs(), lex.version());
    return 0;
  }

  int stats_usage() {
    preflight({opt_.out});
    Lexicon lex = lexicon();
    Corpus c = corpus();
    const Number number =
        opt_.number == "plural" ? Number::plural : Number::singular;
    UsageHistogram h =
        usage_histogram(lex, c, split(opt_.split_name), number, opt_.threads);
    Contingency2x2 t = usage_contingency(h);
    std::optional<ChiSquared> chi;
    try {
      chi = chi_squared_1dof(t);
    } catch (const DegenerateTableError&) {
    }
    ReportMeta m = meta("stats usage " + opt_.number, c, lex.version());
    std::size_t max_x = 0;
    for (const auto& [x, n] : h.male) max_x = std::max(max_x, x);
    for (const auto& [x, n] : h.female) max_x = std::max(max_x, x);
    max_x = std::max<std::size_t>(max_x, ConflictCensus::kStandardCaptions);
    std::ostringstream os;
    if (opt_.format == "json") {
      nlohmann::json bins = nlohmann::json::array();
      for (std::size_t x = 1; x <= max_x; ++x)
        bins.push_back({{"x", x},
                        {"male", UsageHistogram::bin(h.male, x)},
                        {"female", UsageHistogram::bin(h.female, x)}});
      nlohmann::json table = {
          {"rows", t.row_labels}, {"cols", t.col_labels}, {"cells", t.cells}};
      nlohmann::json j = {{"meta", m.json()},
                          {"number", opt_.number},
                          {"histogram", bins},
                          {"contingency", table}};
      if (chi)
        j["chi_squared"] = {{"statistic", chi->statistic},
                            {"p_value", chi->p_value}};
      else
        j["chi_squared"] = nullptr;
      os << j.dump(2) << '\n';
    } else {
      os << m.tsv_header() << "x\tmale\tfemale\n";
      for (std::size_t x = 1; x <= max_x; ++x)
        os << x << '\t' << UsageHistogram::bin(h.male, x) << '\t'
           << UsageHistogram::bin(h.female, x) << '\n';
      os << "# contingency rows=" << t.row_labels[0] << ','
         << t.row_labels[1] << " cols=" << t.col_labels[0] << ','
         << t.col_labels[1] << " cells=" << fmt_double(t.cells[0][0]) << ','
         << fmt_double(t.cells[0][1]) << ',' << fmt_double(t.cells[1][0])
         << ',' << fmt_double(t.cells[1][1]) << '\n';
      if (chi)
        os << "# chi_squared=" << fmt_double(chi->statistic)
           << " p_value=" << fmt_double(chi->p_value) << '\n';
      else
        os << "# chi_squared=degenerate\n";
    }
    write(opt_.out, os.str());
    finish("stats usage", c_inputs(), lex.version());
    return 0;
  }

  int stats_phrases() {
    preflight({opt_.out});
    Lexicon lex = lexicon();
    Corpus c = corpus();
    PhraseStats train =
        two_person_phrase_stats(lex, c, split(opt_.split_name), opt_.threads);
    std::optional<PhraseStats> pred;
    std::vector<std::string> inputs = c_inputs();
    if (!opt_.pred.empty()) {
      std::vector<Tokens> toks;
      for (const auto& p : parse_predictions({opt_.pred, read_file(opt_.pred)}))
        toks.push_back(tokenize(p.caption));
      pred = two_person_phrase_stats(lex, toks, opt_.threads);
      inputs.push_back(opt_.pred);
    }
    std::optional<double> amp;
    if (pred && train.both_genders && pred->both_genders &&
        train.male_first_phrase)
      amp = amplification_ratio(train, *pred);
    ReportMeta m = meta("stats phrases", c, lex.version());
    auto share = [](const PhraseStats& s) {
      return s.both_genders ? static_cast<double>(s.male_first_phrase) /
                                  static_cast<double>(s.both_genders)
                            : 0.0;
    };
    std::ostringstream os;
    if (opt_.format == "json") {
      auto row = [&](const PhraseStats& s) {
        return nlohmann::json{{"both_genders", s.both_genders},
                              {"male_first_phrase", s.male_first_phrase},
                              {"female_first_phrase", s.female_first_phrase},
                              {"male_first_share", share(s)}};
      };
      nlohmann::json j = {{"meta", m.json()}, {"captions", row(train)}};
      if (pred) j["predictions"] = row(*pred);
      if (amp) j["amplification"] = *amp;
      os << j.dump(2) << '\n';
    } else {
      os << m.tsv_header()
         << "source\tboth_genders\tmale_first_phrase\tfemale_first_phrase\t"
            "male_first_share\n";
      auto row = [&](std::string_view name, const PhraseStats& s) {
        os << name << '\t' << s.both_genders << '\t' << s.male_first_phrase
           << '\t' << s.female_first_phrase << '\t' << fmt_double(share(s))
           << '\n';
      };
      row("captions", train);
      if (pred) row("predictions", *pred);
      if (amp) os << "# amplification=" << fmt_double(*amp) << '\n';
    }
    write(opt_.out, os.str());
    finish("stats phrases", inputs, lex.version());
    return 0;
  }

  int build_classification_set() {
    const std::string summary = opt_.out + ".summary.json";
    preflight({opt_.out, summary});
    Lexicon lex = lexicon();
    Corpus c = corpus();
    ClassificationSet cs = capbias::build_gender_classification_set(
        lex, c, split(opt_.split_name), opt_.threads);
    std::ostringstream os;
    for (const auto& crop : cs.crops) os << to_json(crop).dump() << '\n';
    write(opt_.out, os.str());
    nlohmann::json j = {
        {"meta", meta("build classification-set", c, lex.version()).json()},
        {"counts",
         {{"male", cs.male}, {"female", cs.female}, {"person", cs.person}}},
        {"single_person_images", cs.single_person_images},
        {"labelled_without_person_box", cs.labelled_without_person_box},
        {"parameters", {{"split", opt_.split_name}}}};
    write(summary, j.dump(2) + "\n");
    log_ << "classification-set: male=" << cs.male << " female=" << cs.female
         << " person=" << cs.person << " (no person box: "
         << cs.labelled_without_person_box << ")\n";
    finish("build classification-set", c_inputs(), lex.version());
    return 0;
  }

  int build_unusual_set() {
    const std::string summary = opt_.out + ".summary.json";
    preflight({opt_.out, summary});
    Lexicon lex = lexicon();
    Corpus c = corpus();
    BiasProfile p =
        build_bias_profile(lex, c, split(opt_.profile_split), opt_.threads);
    UnusualSet us = capbias::build_unusual_set(
        lex, c, p, split(opt_.eval_split), opt_.top_k, opt_.min_count);
    std::ostringstream os;
    for (const auto& u : us.instances) os << to_json(u).dump() << '\n';
    write(opt_.out, os.str());
    nlohmann::json j = {
        {"meta", meta("build unusual-set", c, lex.version()).json()},
        {"counts", {{"male", us.male}, {"female", us.female}}},
        {"parameters",
         {{"profile_split", opt_.profile_split},
          {"eval_split", opt_.eval_split},
          {"top_k", opt_.top_k},
          {"min_count", opt_.min_count}}},
        {"male_biased_words", us.words.male_biased},
        {"female_biased_words", us.words.female_biased}};
    write(summary, j.dump(2) + "\n");
    log_ << "unusual-set: male=" << us.male << " female=" << us.female << '\n';
    finish("build unusual-set", c_inputs(), lex.version());
    return 0;
  }

  int inject() {
    const std::string stats = opt_.out + ".stats.json";
    preflight({opt_.out, stats});
    Lexicon lex = lexicon();
    auto preds = parse_predictions({opt_.pred, read_file(opt_.pred)});
    auto labels = parse_labels({opt_.labels, read_file(opt_.labels)});
    InjectOptions io;
    io.child_words = opt_.child_words;
    InjectionResult r = inject_corpus(lex, preds, labels, io);
    std::ostringstream os;
    for (const auto& p : r.captions) os << to_json(p).dump() << '\n';
    write(opt_.out, os.str());
    nlohmann::json rules = nlohmann::json::object();
    for (const auto& [rule, n] : r.rule_counts)
      rules[std::string(to_string(rule))] = n;
    nlohmann::json per = nlohmann::json::array();
    for (const auto& rep : r.reports)
      per.push_back({{"image_id", rep.caption_id},
                     {"rule", to_string(rep.rule)},
                     {"substitutions", rep.substitutions}});
    nlohmann::json j = {{"lexicon", lex.version()},
                        {"captions", r.captions.size()},
                        {"rules", rules},
                        {"substitutions", r.substitutions},
                        {"images_without_labels", r.images_without_labels},
                        {"reports", per}};
    write(stats, j.dump(2) + "\n");
    log_ << "inject: " << r.captions.size() << " captions, "
         << r.substitutions << " substitutions, " << r.images_without_labels
         << " without labels\n";
    finish("inject", {opt_.pred, opt_.labels}, lex.version());
    return 0;
  }

  int bleu() {
    preflight({opt_.out});
    std::optional<Lexicon> lex;
    if (opt_.neutral_refs) lex = lexicon();
    auto preds = parse_predictions({opt_.pred, read_file(opt_.pred)});
    auto refs = parse_references({opt_.refs, read_file(opt_.refs)},
                                 lex ? &*lex : nullptr);
    std::vector<Tokens> cands;
    std::vector<ReferenceSet> ref_sets;
    std::vector<std::int64_t> missing;
    for (const auto& p : preds) {
      auto it = refs.find(p.image_id);
      if (it == refs.end() || it->second.empty()) {
        missing.push_back(p.image_id);
        continue;
      }
      cands.push_back(tokenize(p.caption));
      ref_sets.push_back(it->second);
    }
    if (!missing.empty())
      throw IntegrityError("predictions without reference captions", missing);
    BleuResult corpus_score =
        capbias::bleu(cands, ref_sets, kMaxBleuOrder, Smoothing::none,
                      opt_.threads);
    nlohmann::json per = nlohmann::json::array();
    for (std::size_t i = 0; i < cands.size(); ++i)
      per.push_back({{"image_id", preds[i].image_id},
                     {"bleu", sentence_bleu(cands[i], ref_sets[i]).bleu}});
    nlohmann::json j = {
        {"corpus",
         {{"bleu", corpus_score.bleu},
          {"brevity_penalty", corpus_score.brevity_penalty},
          {"candidate_length", corpus_score.candidate_length},
          {"reference_length", corpus_score.reference_length}}},
        {"neutral_refs", opt_.neutral_refs},
        {"per_instance", per}};
    if (lex) j["lexicon"] = lex->version();
    write(opt_.out, j.dump(2) + "\n");
    log_ << "bleu: BLEU-1..4 = " << fmt_double(corpus_score.bleu[0]) << ' '
         << fmt_double(corpus_score.bleu[1]) << ' '
         << fmt_double(corpus_score.bleu[2]) << ' '
         << fmt_double(corpus_score.bleu[3]) << '\n';
    finish("bleu", {opt_.pred, opt_.refs}, lex ? lex->version() : "");
    return 0;
  }

  std::map<std::string, std::string> parameters;
  std::string subcommand;

 private:
  static std::map<std::int64_t, std::vector<Tokens>> parse_references(
      const JsonSource& src, const Lexicon* neutral) {
    nlohmann::json doc = detail::parse_json(src);
    std::map<std::int64_t, std::vector<std::pair<std::int64_t, Tokens>>> tmp;
    detail::with_schema(src.name, [&] {
      for (const auto& ann : doc.at("annotations")) {
        Tokens t = tokenize(ann.at("caption").get<std::string>());
        if (neutral) t = neutralize_tokens(*neutral, t).tokens;
        tmp[ann.at("image_id").get<std::int64_t>()].emplace_back(
            ann.at("id").get<std::int64_t>(), std::move(t));
      }
      return 0;
    });
    std::map<std::int64_t, std::vector<Tokens>> out;
    for (auto& [id, v] : tmp) {
      std::sort(v.begin(), v.end());
      for (auto& [cid, t] : v) out[id].push_back(std::move(t));
    }
    return out;
  }

  Lexicon lexicon() const { return load_lexicon(opt_.lexicon); }

  Corpus corpus() const {
    Corpus c = load_corpus(opt_.captions, opt_.instances, opt_.split_path);
    const LoadStats& s = c.load_stats();
    if (s.images_not_in_split)
      log_ << "corpus: dropped " << s.images_not_in_split
           << " images absent from the split file ("
           << s.captions_of_dropped_images << " captions)\n";
    if (s.degenerate_instances)
      log_ << "corpus: dropped " << s.degenerate_instances
           << " person instances with empty boxes\n";
    return c;
  }

  std::vector<std::string> c_inputs() const {
    std::vector<std::string> in = opt_.captions;
    in.insert(in.end(), opt_.instances.begin(), opt_.instances.end());
    in.push_back(opt_.split_path);
    if (opt_.lexicon) in.push_back(*opt_.lexicon);
    return in;
  }

  static Split split(const std::string& name) {
    auto s = parse_split(name);
    if (!s) throw ConfigError("unknown split name '" + name + "'");
    return *s;
  }

  ReportMeta meta(std::string report, const Corpus& c,
                  std::optional<std::string> lexicon_version) const {
    ReportMeta m;
    m.report = std::move(report);
    m.corpus_hash = c.hash();
    m.split = c.split_id() + ":" + opt_.split_name;
    m.lexicon_version = lexicon_version.value_or("none");
    return m;
  }

  void preflight(std::vector<std::string> paths) {
    paths.push_back(manifest_path());
    if (opt_.force) return;
    for (const auto& p : paths)
      if (std::filesystem::exists(p))
        throw InputError("output " + p + " exists; pass --force to overwrite");
  }

  std::string manifest_path() const { return opt_.out + ".manifest.json"; }

  static void write(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot write " + path);
    f << text;
    if (!f.flush()) throw IoError("write failed for " + path);
  }

  void finish(const std::string& name, const std::vector<std::string>& inputs,
              const std::string& lexicon_version) {
    RunManifest m{name, parameters, inputs, lexicon_version};
    write(manifest_path(), m.json().dump(2) + "\n");
  }

  Options opt_;
  std::ostream& out_;
  std::ostream& log_;
};

// Parses argv and runs one subcommand. Exit codes: 0 success, 2 bad input
// or usage, 1 internal failure.
inline int run(const std::vector<std::string>& argv, std::ostream& out,
               std::ostream& err) {
  Options opt;
  if (const char* env = std::getenv("CAPBIAS_LEXICON"); env && *env)
    opt.lexicon = env;

  CLI::App app{"Gender bias analysis and caption rewriting for COCO-style "
               "caption corpora",
               "capbias"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));

  auto corpus_flags = [&](CLI::App* sc, bool instances_required) {
    sc->add_option("--captions", opt.captions, "COCO captions JSON (repeatable)")
        ->required()
        ->check(CLI::ExistingFile);
    auto* inst = sc->add_option("--instances", opt.instances,
                                "COCO instances JSON (repeatable)")
                     ->check(CLI::ExistingFile);
    if (instances_required) inst->required();
    sc->add_option("--split", opt.split_path, "split JSON {train,val,test}")
        ->required()
        ->check(CLI::ExistingFile);
  };
  auto lexicon_flag = [&](CLI::App* sc) {
    sc->add_option("--lexicon", opt.lexicon,
                   "lexicon config JSON (default: $CAPBIAS_LEXICON or built-in)")
        ->check(CLI::ExistingFile);
  };
  auto common = [&](CLI::App* sc, bool out_required = true) {
    auto* o = sc->add_option("--out", opt.out, "output path");
    if (out_required) o->required();
    sc->add_flag("--force", opt.force, "overwrite existing outputs");
    sc->add_option("--threads", opt.threads, "worker threads")
        ->check(CLI::PositiveNumber);
  };
  auto split_name = [&](CLI::App* sc, bool allow_all) {
    std::vector<std::string> names{"train", "val", "test"};
    if (allow_all) names.push_back("all");
    sc->add_option("--split-name", opt.split_name, "split to process")
        ->check(CLI::IsMember(names));
  };
  auto format_flag = [&](CLI::App* sc) {
    sc->add_option("--format", opt.format, "report format")
        ->check(CLI::IsMember({"tsv", "json"}));
  };

  auto* ingest = app.add_subcommand("ingest-check", "load and validate a corpus");
  corpus_flags(ingest, false);
  common(ingest, false);

  auto* neut = app.add_subcommand("neutralize", "write gender-neutral captions");
  corpus_flags(neut, false);
  lexicon_flag(neut);
  common(neut);
  split_name(neut, true);
  neut->add_option("--edits", opt.edits, "TSV edit report path");

  auto* stats = app.add_subcommand("stats", "bias statistics");
  stats->require_subcommand(1);
  auto* s_bias = stats->add_subcommand("bias", "per-word gender bias profile");
  auto* s_census = stats->add_subcommand("census", "conflicting-gender census");
  auto* s_usage = stats->add_subcommand("usage", "gendered vs neutral usage");
  auto* s_phr = stats->add_subcommand("phrases", "two-person phrase statistics");
  for (auto* sc : {s_bias, s_census, s_usage, s_phr}) {
    corpus_flags(sc, false);
    lexicon_flag(sc);
    common(sc);
    split_name(sc, false);
    format_flag(sc);
  }
  s_usage->add_option("--number", opt.number, "singular or plural")
      ->check(CLI::IsMember({"singular", "plural"}));
  s_phr->add_option("--pred", opt.pred, "predictions JSON lines")
      ->check(CLI::ExistingFile);

  auto* build = app.add_subcommand("build", "dataset construction");
  build->require_subcommand(1);
  auto* b_cls = build->add_subcommand("classification-set",
                                      "three-class gender crop specs");
  corpus_flags(b_cls, true);
  lexicon_flag(b_cls);
  common(b_cls);
  split_name(b_cls, false);
  auto* b_unu = build->add_subcommand("unusual-set",
                                      "anti-stereotypical evaluation set");
  corpus_flags(b_unu, false);
  lexicon_flag(b_unu);
  common(b_unu);
  b_unu->add_option("--profile-split", opt.profile_split,
                    "split the bias profile is built from")
      ->check(CLI::IsMember({"train", "val", "test"}));
  b_unu->add_option("--eval-split", opt.eval_split, "split to filter")
      ->check(CLI::IsMember({"train", "val", "test"}));
  b_unu->add_option("--top-k", opt.top_k, "biased words kept per gender")
      ->check(CLI::PositiveNumber);
  b_unu->add_option("--min-count", opt.min_count,
                    "minimum gendered co-occurrences per word");

  auto* inj = app.add_subcommand("inject", "re-insert gender from labels");
  inj->add_option("--pred", opt.pred, "neutral predictions JSON lines")
      ->required()
      ->check(CLI::ExistingFile);
  inj->add_option("--labels", opt.labels, "person labels JSON lines")
      ->required()
      ->check(CLI::ExistingFile);
  lexicon_flag(inj);
  common(inj);
  inj->add_flag("--child-words", opt.child_words,
                "render child/children for undetermined young subjects");

  auto* bl = app.add_subcommand("bleu", "BLEU-1..4 of predictions");
  bl->add_option("--pred", opt.pred, "predictions JSON lines")
      ->required()
      ->check(CLI::ExistingFile);
  bl->add_option("--refs", opt.refs, "reference COCO captions JSON")
      ->required()
      ->check(CLI::ExistingFile);
  bl->add_flag("--neutral-refs", opt.neutral_refs,
               "neutralize references before scoring");
  lexicon_flag(bl);
  common(bl);

  try {
    std::vector<std::string> args(argv.rbegin(), argv.rend());
    if (!args.empty()) args.pop_back();  // program name
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << kToolVersion << '\n';
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  Runner r(opt, out, err);
  for (const auto* sc : app.get_subcommands()) {
    r.subcommand = sc->get_name();
    for (const auto* leaf : sc->get_subcommands())
      r.subcommand += " " + leaf->get_name();
  }
  // Flags that shape outputs; --threads and --force do not.
  r.parameters = {{"split_name", opt.split_name},
                  {"format", opt.format},
                  {"number", opt.number},
                  {"profile_split", opt.profile_split},
                  {"eval_split", opt.eval_split},
                  {"top_k", std::to_string(opt.top_k)},
                  {"min_count", std::to_string(opt.min_count)},
                  {"child_words", opt.child_words ? "true" : "false"},
                  {"neutral_refs", opt.neutral_refs ? "true" : "false"},
                  {"out", opt.out}};

  try {
    if (*ingest) return r.ingest_check();
    if (*neut) return r.neutralize();
    if (*s_bias) return r.stats_bias();
    if (*s_census) return r.stats_census();
    if (*s_usage) return r.stats_usage();
    if (*s_phr) return r.stats_phrases();
    if (*b_cls) return r.build_classification_set();
    if (*b_unu) return r.build_unusual_set();
    if (*inj) return r.inject();
    if (*bl) return r.bleu();
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return 1;
  }
  err << app.help();
  return 2;
}

}  // namespace capbias::cli
