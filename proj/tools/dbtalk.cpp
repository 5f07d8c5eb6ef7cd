// dbtalk: schema building, training-data synthesis, and query execution
// from the command line. Exit codes: 0 success, 1 user error, 2 internal.

#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "dbtalk/augmenter.hpp"
#include "dbtalk/errors.hpp"
#include "dbtalk/executor.hpp"
#include "dbtalk/generic_library.hpp"
#include "dbtalk/parser.hpp"
#include "dbtalk/printer.hpp"
#include "dbtalk/schema_builder.hpp"
#include "dbtalk/template_engine.hpp"
#include "dbtalk/typecheck.hpp"

using namespace dbtalk;
using Json = nlohmann::ordered_json;

namespace {

std::string cell_to_text(const Value& v) {
  if (v.is_null()) return "";
  if (const auto* e = std::get_if<EntityId>(&v.v)) return e->id;
  const auto tokens = print_tokens(v);
  std::string out;
  for (size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += tokens[i];
  }
  return out;
}

void print_result(const ResultSet& rs, const std::string& format, std::ostream& out) {
  std::vector<std::string> columns;
  for (const auto& [name, type] : rs.row_type) columns.push_back(name);
  if (format == "json") {
    Json arr = Json::array();
    for (const Row& row : rs.rows) {
      Json obj = Json::object();
      for (const auto& c : columns) {
        auto it = row.find(c);
        obj[c] = it == row.end() ? "" : cell_to_text(it->second);
      }
      arr.push_back(std::move(obj));
    }
    out << arr.dump(2) << "\n";
    return;
  }
  for (size_t i = 0; i < columns.size(); ++i) out << (i ? "\t" : "") << columns[i];
  out << "\n";
  for (const Row& row : rs.rows) {
    for (size_t i = 0; i < columns.size(); ++i) {
      auto it = row.find(columns[i]);
      out << (i ? "\t" : "") << (it == row.end() ? "" : cell_to_text(it->second));
    }
    out << "\n";
  }
}

GeoPoint parse_here(const std::string& text) {
  const auto comma = text.find(',');
  if (comma == std::string::npos) throw ConfigError("--here expects lat,lon");
  try {
    return GeoPoint{std::stod(text.substr(0, comma)), std::stod(text.substr(comma + 1))};
  } catch (...) {
    throw ConfigError("--here expects lat,lon");
  }
}

std::string family_of(const std::string& template_id) {
  return template_id.substr(0, template_id.find('/'));
}

std::vector<Template> load_templates(const NlSchema& schema, const std::string& dsl_path,
                                     bool include_refinements) {
  LibraryOptions options;
  options.include_refinements = include_refinements;
  auto templates = builtin_templates(schema, options);
  if (!dsl_path.empty()) {
    std::ifstream in(dsl_path);
    if (!in) throw Error("cannot read template file: " + dsl_path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    auto user = parse_template_dsl(text, schema);
    templates.insert(templates.end(), user.begin(), user.end());
  }
  return templates;
}

struct ValidateReport {
  int total = 0;
  int parsed = 0;
  int typechecked = 0;
  int executed = 0;
  std::vector<std::pair<int, std::string>> failures;  // line, reason
};

ValidateReport validate_file(const std::string& path, const NlSchema& schema,
                             const KnowledgeBase& kb, const EvalContext& ctx) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read dataset file: " + path);
  ValidateReport report;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    report.total += 1;
    const auto tab1 = line.find('\t');
    const auto tab2 = tab1 == std::string::npos ? std::string::npos : line.find('\t', tab1 + 1);
    if (tab1 == std::string::npos || tab2 == std::string::npos ||
        line.find('\t', tab2 + 1) != std::string::npos) {
      report.failures.emplace_back(line_no, "not a three-column TSV line");
      continue;
    }
    AstPtr ast;
    try {
      ast = parse(line.substr(tab2 + 1));
      report.parsed += 1;
    } catch (const Error& e) {
      report.failures.emplace_back(line_no, std::string("parse: ") + e.what());
      continue;
    }
    try {
      typecheck(*ast, schema);
      report.typechecked += 1;
    } catch (const Error& e) {
      report.failures.emplace_back(line_no, std::string("typecheck: ") + e.what());
      continue;
    }
    try {
      execute(*ast, kb, schema, ctx);
      report.executed += 1;
    } catch (const Error& e) {
      report.failures.emplace_back(line_no, std::string("execute: ") + e.what());
    }
  }
  return report;
}

int run(int argc, char** argv) {
  CLI::App app{"DBTalk toolkit: typed queries over knowledge bases and "
               "synthesized question/query training data"};
  app.require_subcommand(1);

  // build-schema
  auto* cmd_build = app.add_subcommand("build-schema",
                                       "Convert a vocabulary plus JSON-LD data into a schema");
  std::string vocab_path, data_dir, out_path, annotations_path, kb_out;
  std::vector<std::string> roots, overrides;
  cmd_build->add_option("--vocab", vocab_path, "Vocabulary JSON")->required();
  cmd_build->add_option("--data", data_dir, "Directory of JSON-LD documents")->required();
  cmd_build->add_option("--out", out_path, "Schema output file")->required();
  cmd_build->add_option("--annotations", annotations_path, "Manual annotation overlay");
  cmd_build->add_option("--kb-out", kb_out, "Directory for the normalized knowledge base");
  cmd_build->add_option("--entity-root", roots, "Entity root classes (default five roots)");
  cmd_build->add_option("--entity-override", overrides,
                        "Class=true|false entity classification overrides");

  // synthesize
  auto* cmd_synth = app.add_subcommand("synthesize", "Expand templates into placeholder pairs");
  std::string schema_path, synth_out, stats_path, provenance_path, templates_path, root_nt =
      "question";
  std::vector<std::string> enable_kinds;
  int depth = 6;
  std::uint64_t seed = 0;
  bool seed_set = false, exhaustive = false, include_refinements = false, dump_templates = false;
  std::string target_sizes_text;
  cmd_synth->add_option("--schema", schema_path, "Schema file")->required();
  cmd_synth->add_option("--depth", depth, "Maximum expansion depth");
  cmd_synth
      ->add_option_function<std::uint64_t>(
          "--seed", [&](std::uint64_t s) { seed = s; seed_set = true; }, "RNG seed (required)")
      ->expected(1);
  cmd_synth->add_option("--target-size", target_sizes_text,
                        "Per-depth stratum quota (one int, or comma list)");
  cmd_synth->add_flag("--exhaustive", exhaustive, "Enumerate everything, ignore quotas");
  cmd_synth->add_option("--root", root_nt, "Root nonterminal (default question)");
  cmd_synth->add_option("--templates", templates_path, "Extra template DSL file");
  cmd_synth->add_option("--out", synth_out, "Output TSV (default stdout)");
  cmd_synth->add_option("--stats", stats_path, "Write per-family statistics JSON");
  cmd_synth->add_option("--provenance", provenance_path, "Write id -> template chain TSV");
  cmd_synth->add_option("--enable", enable_kinds, "Nonterminal kinds to expand");
  cmd_synth->add_flag("--include-refinements", include_refinements,
                      "Include the optional 'both' / 'or more' templates");
  cmd_synth->add_flag("--dump-templates", dump_templates,
                      "Print the instantiated template library and exit");

  // dump-templates
  auto* cmd_dump = app.add_subcommand("dump-templates", "Print the instantiated template library");
  std::string dump_schema_path, dump_templates_path;
  bool dump_refinements = false;
  cmd_dump->add_option("--schema", dump_schema_path, "Schema file")->required();
  cmd_dump->add_option("--templates", dump_templates_path, "Extra template DSL file");
  cmd_dump->add_flag("--include-refinements", dump_refinements, "");

  // augment
  auto* cmd_augment = app.add_subcommand("augment", "Fill placeholders with real values");
  std::string aug_in, aug_paraphrases, aug_schema, aug_kb, aug_out;
  int multiplier = 1;
  std::uint64_t aug_seed = 0;
  bool aug_seed_set = false;
  cmd_augment->add_option("--in", aug_in, "Placeholder-form TSV")->required();
  cmd_augment->add_option("--paraphrases", aug_paraphrases, "Paraphrase TSV to merge");
  cmd_augment->add_option("--schema", aug_schema, "Schema file")->required();
  cmd_augment->add_option("--kb", aug_kb, "Knowledge-base directory")->required();
  cmd_augment->add_option("--multiplier", multiplier, "Samples per input pair")->required();
  cmd_augment
      ->add_option_function<std::uint64_t>(
          "--seed", [&](std::uint64_t s) { aug_seed = s; aug_seed_set = true; }, "RNG seed")
      ->expected(1);
  cmd_augment->add_option("--out", aug_out, "Output TSV (default stdout)");

  // query
  auto* cmd_query = app.add_subcommand("query", "Execute one query");
  std::string q_schema, q_kb, q_here, q_now, q_format = "tsv", q_text;
  cmd_query->add_option("--schema", q_schema, "Schema file")->required();
  cmd_query->add_option("--kb", q_kb, "Knowledge-base directory")->required();
  cmd_query->add_option("--here", q_here, "lat,lon for 'here'");
  cmd_query->add_option("--now", q_now, "YYYY-MM-DD for 'now'");
  cmd_query->add_option("--format", q_format, "tsv or json")
      ->check(CLI::IsMember({"tsv", "json"}));
  cmd_query->add_option("query", q_text, "Query in surface syntax")->required();

  // validate
  auto* cmd_validate = app.add_subcommand("validate", "Check a dataset end to end");
  std::string v_in, v_schema, v_kb, v_here, v_now, v_format = "tsv";
  cmd_validate->add_option("--in", v_in, "Dataset TSV")->required();
  cmd_validate->add_option("--schema", v_schema, "Schema file")->required();
  cmd_validate->add_option("--kb", v_kb, "Knowledge-base directory")->required();
  cmd_validate->add_option("--here", v_here, "lat,lon for 'here'");
  cmd_validate->add_option("--now", v_now, "YYYY-MM-DD for 'now'");
  cmd_validate->add_option("--format", v_format, "tsv or json")
      ->check(CLI::IsMember({"tsv", "json"}));

  // split
  auto* cmd_split = app.add_subcommand("split", "Seeded ratio split of a dataset");
  std::string s_in, s_prefix, s_ratios = "0.8,0.1,0.1";
  std::uint64_t s_seed = 0;
  bool s_seed_set = false;
  cmd_split->add_option("--in", s_in, "Dataset TSV")->required();
  cmd_split->add_option("--out-prefix", s_prefix, "Output prefix")->required();
  cmd_split->add_option("--ratios", s_ratios, "Comma-separated ratios (default 0.8,0.1,0.1)");
  cmd_split
      ->add_option_function<std::uint64_t>(
          "--seed", [&](std::uint64_t s) { s_seed = s; s_seed_set = true; }, "RNG seed")
      ->expected(1);

  CLI11_PARSE(app, argc, argv);

  if (*cmd_build) {
    SchemaGraph graph = SchemaGraph::load(vocab_path);
    BuilderConfig config;
    if (!roots.empty()) config.entity_roots = roots;
    for (const auto& text : overrides) {
      const auto eq = text.find('=');
      if (eq == std::string::npos)
        throw ConfigError("--entity-override expects Class=true|false");
      config.entity_overrides[text.substr(0, eq)] = text.substr(eq + 1) == "true";
    }
    BuildResult result = build_schema(graph, list_data_files(data_dir), config);
    if (!annotations_path.empty()) result.schema.merge_overlay_file(annotations_path);
    result.schema.save(out_path);
    if (!kb_out.empty()) result.kb.save_dir(kb_out, result.schema);
    for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";
    std::cerr << "wrote " << out_path << " (" << result.schema.tables.size() << " tables, "
              << result.warnings.size() << " warnings)\n";
    return 0;
  }

  if (*cmd_synth) {
    NlSchema schema = NlSchema::load(schema_path);
    auto templates = load_templates(schema, templates_path, include_refinements);
    if (dump_templates) {
      std::cout << dump_template_dsl(templates);
      return 0;
    }
    if (!seed_set) throw ConfigError("synthesize needs an explicit --seed");
    ExpansionConfig cfg;
    cfg.max_depth = depth;
    cfg.seed = seed;
    cfg.exhaustive = exhaustive;
    cfg.root = root_nt;
    for (const auto& kind : enable_kinds) cfg.enabled.insert(kind);
    if (!target_sizes_text.empty()) {
      std::stringstream ss(target_sizes_text);
      std::string item;
      std::vector<int> sizes;
      while (std::getline(ss, item, ',')) sizes.push_back(std::stoi(item));
      if (sizes.size() == 1)
        cfg.default_target = sizes[0];
      else
        cfg.target_sizes = sizes;
    }
    auto derivations = expand(templates, schema, cfg);

    std::vector<DatasetRecord> records;
    std::map<std::string, int> family_counts;  // records touching each family
    std::map<int, int> depth_counts;
    char id_buf[32];
    for (size_t i = 0; i < derivations.size(); ++i) {
      std::snprintf(id_buf, sizeof id_buf, "syn-%06zu", i + 1);
      records.push_back(to_placeholder_record(derivations[i], id_buf));
      std::set<std::string> families;
      for (const auto& id : derivations[i].provenance) families.insert(family_of(id));
      for (const auto& family : families) family_counts[family] += 1;
      depth_counts[derivations[i].depth] += 1;
    }
    if (synth_out.empty())
      std::cout << emit_tsv_text(records);
    else
      emit_tsv(records, synth_out);
    if (!provenance_path.empty()) {
      std::ofstream prov(provenance_path);
      if (!prov) throw Error("cannot write provenance file: " + provenance_path);
      for (size_t i = 0; i < derivations.size(); ++i) {
        prov << records[i].id << "\t";
        const auto& chain = derivations[i].provenance;
        for (size_t k = 0; k < chain.size(); ++k) prov << (k ? "," : "") << chain[k];
        prov << "\n";
      }
    }
    Json stats;
    stats["total"] = records.size();
    stats["families"] = family_counts;
    Json by_depth = Json::object();
    for (const auto& [d, n] : depth_counts) by_depth[std::to_string(d)] = n;
    stats["by_depth"] = std::move(by_depth);
    if (!stats_path.empty()) {
      std::ofstream out(stats_path);
      out << stats.dump(2) << "\n";
    }
    std::cerr << "synthesized " << records.size() << " pairs across " << family_counts.size()
              << " template families\n";
    return 0;
  }

  if (*cmd_dump) {
    NlSchema schema = NlSchema::load(dump_schema_path);
    std::cout << dump_template_dsl(load_templates(schema, dump_templates_path, dump_refinements));
    return 0;
  }

  if (*cmd_augment) {
    if (!aug_seed_set) throw ConfigError("augment needs an explicit --seed");
    NlSchema schema = NlSchema::load(aug_schema);
    std::vector<LoadWarning> warnings;
    KnowledgeBase kb = KnowledgeBase::load_dir(aug_kb, schema, &warnings);
    for (const auto& w : warnings)
      std::cerr << "warning: " << w.table << " row " << w.row << " " << w.field << ": "
                << w.message << "\n";
    auto records = load_tsv(aug_in);
    if (!aug_paraphrases.empty()) {
      auto extra = load_tsv(aug_paraphrases);
      for (auto& rec : extra) {
        rec.origin = DatasetRecord::Origin::paraphrase;
        records.push_back(std::move(rec));
      }
    }
    AugmentStats stats;
    auto out = augment(records, kb, schema, multiplier, aug_seed, &stats);
    if (aug_out.empty())
      std::cout << emit_tsv_text(out);
    else
      emit_tsv(out, aug_out);
    std::cerr << "augmented " << stats.input << " -> " << stats.emitted << " records ("
              << stats.dropped << " dropped)\n";
    for (const auto& w : stats.warnings) std::cerr << "warning: " << w << "\n";
    return 0;
  }

  if (*cmd_query) {
    NlSchema schema = NlSchema::load(q_schema);
    std::vector<LoadWarning> warnings;
    KnowledgeBase kb = KnowledgeBase::load_dir(q_kb, schema, &warnings);
    for (const auto& w : warnings)
      std::cerr << "warning: " << w.table << " row " << w.row << " " << w.field << ": "
                << w.message << "\n";
    EvalContext ctx;
    if (!q_here.empty()) ctx.here = parse_here(q_here);
    if (!q_now.empty()) ctx.now = DateVal{q_now};
    AstPtr ast = parse(q_text);
    typecheck(*ast, schema);
    print_result(execute(*ast, kb, schema, ctx), q_format, std::cout);
    return 0;
  }

  if (*cmd_validate) {
    NlSchema schema = NlSchema::load(v_schema);
    std::vector<LoadWarning> warnings;
    KnowledgeBase kb = KnowledgeBase::load_dir(v_kb, schema, &warnings);
    for (const auto& w : warnings)
      std::cerr << "warning: " << w.table << " row " << w.row << " " << w.field << ": "
                << w.message << "\n";
    EvalContext ctx;
    if (!v_here.empty()) ctx.here = parse_here(v_here);
    if (!v_now.empty()) ctx.now = DateVal{v_now};
    ValidateReport report = validate_file(v_in, schema, kb, ctx);
    auto pct = [&](int n) { return report.total == 0 ? 100.0 : 100.0 * n / report.total; };
    if (report.total == 0) std::cerr << "warning: empty dataset, metrics are vacuous\n";
    for (const auto& [line, reason] : report.failures)
      std::cerr << "line " << line << ": " << reason << "\n";
    if (v_format == "json") {
      Json out;
      out["records"] = report.total;
      out["parse_pct"] = pct(report.parsed);
      out["typecheck_pct"] = pct(report.typechecked);
      out["execute_pct"] = pct(report.executed);
      std::cout << out.dump(2) << "\n";
    } else {
      std::cout << "records\t" << report.total << "\n";
      std::cout << "parse_pct\t" << pct(report.parsed) << "\n";
      std::cout << "typecheck_pct\t" << pct(report.typechecked) << "\n";
      std::cout << "execute_pct\t" << pct(report.executed) << "\n";
    }
    return 0;
  }

  if (*cmd_split) {
    if (!s_seed_set) throw ConfigError("split needs an explicit --seed");
    auto records = load_tsv(s_in);
    std::vector<double> ratios;
    std::stringstream ss(s_ratios);
    std::string item;
    while (std::getline(ss, item, ',')) ratios.push_back(std::stod(item));
    auto parts = split_dataset(records, ratios, s_seed);
    static const char* names[] = {"train", "dev", "test"};
    for (size_t i = 0; i < parts.size(); ++i) {
      const std::string suffix = i < 3 && parts.size() <= 3 ? names[i] : std::to_string(i);
      emit_tsv(parts[i], s_prefix + suffix + ".tsv");
      std::cerr << s_prefix + suffix + ".tsv: " << parts[i].size() << " records\n";
    }
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const SyntaxError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const TypeError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const RuntimeError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  }
}
