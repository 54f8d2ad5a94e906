#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>

#include "shadow/engine.hpp"
#include "shadow/explain.hpp"
#include "shadow/feed.hpp"
#include "shadow/fixtures.hpp"
#include "shadow/inference.hpp"
#include "shadow/manifest.hpp"
#include "shadow/query/eval.hpp"
#include "shadow/query/parser.hpp"

namespace {

using nlohmann::json;
using namespace shadow;

// Diagnostics go to stderr as one machine-readable JSON object; stdout stays
// data-only so pipelines can consume it.
int fail(Errc code, const std::string& message) {
  json j = {{"code", errc_name(code)}, {"message", message}};
  std::cerr << j.dump() << "\n";
  return 1;
}

int fail(const Error& e) { return fail(e.code, e.message); }

Result<std::uint64_t> parse_wid(std::string text) {
  if (!text.empty() && text[0] == '#') text = text.substr(1);
  if (text.empty()) return make_error(Errc::InvalidArgument, "expected #<wid>");
  std::uint64_t v = 0;
  for (char c : text) {
    if (!std::isdigit(static_cast<unsigned char>(c))) {
      return make_error(Errc::InvalidArgument, "malformed WID: " + text);
    }
    v = v * 10 + static_cast<std::uint64_t>(c - '0');
  }
  return v;
}

Result<Engine::Ctx> make_ctx(const Store& store, const std::string& process_name, RuleId rule) {
  auto pid = store.process_by_name(process_name);
  if (!pid) {
    return make_error(Errc::UnregisteredProcess,
                      "process \"" + process_name + "\" is not registered");
  }
  Engine::Ctx ctx;
  ctx.process = *pid;
  ctx.rule = rule;
  return ctx;
}

std::string read_evidence_text(const std::string& arg) {
  if (!arg.empty() && arg[0] == '@') {
    std::ifstream in(arg.substr(1));
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return text;
  }
  return arg;
}

int run_query_text(Engine& engine, const Engine::Ctx& ctx, const std::string& text,
                   const std::string& format_name) {
  auto parsed = query::parse(text);
  if (!parsed.ok()) return fail(Errc::ParseError, parsed.diagnostic->to_string());
  auto format = query::render_format_from_name(format_name);
  if (!format) return fail(format.error());
  auto result = query::evaluate(*parsed.query, engine, ctx);
  if (!result) return fail(result.error());
  std::cout << query::render(engine.store(), *result, *format);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"shadow - semantic data integration store"};
  app.require_subcommand(1);

  std::string store_path = "./store";
  std::string process_name = "system";
  RuleId rule_id = 1;
  app.add_option("--store", store_path, "store directory (event log lives here)");
  app.add_option("--process", process_name, "registered process authoring mutations");
  app.add_option("--rule", rule_id, "business rule id cited by mutations");

  auto* cmd_init = app.add_subcommand("init", "create an empty store");

  auto* cmd_schema = app.add_subcommand("schema", "semantic manifest operations");
  cmd_schema->require_subcommand(1);
  std::string manifest_path;
  auto* cmd_schema_apply = cmd_schema->add_subcommand("apply", "apply a semantic manifest");
  cmd_schema_apply->add_option("file", manifest_path, "manifest JSON file")->required();

  std::string feed_path, hold_schema, hold_column;
  bool strict = false;
  auto* cmd_load = app.add_subcommand("load", "ingest a JSON-lines feed");
  cmd_load->add_option("file", feed_path, "feed file")->required();
  cmd_load->add_flag("--strict", strict, "abort on first malformed line");
  cmd_load->add_option("--hold-until-schema", hold_schema,
                       "buffer rows until the referenced key exists in this schema");
  cmd_load->add_option("--hold-until-column", hold_column, "feed column holding the reference");

  std::uint64_t tag_shadow = 0;
  std::string tag_kind;
  auto* cmd_tag = app.add_subcommand("tag", "attach a W-tag to a shadow");
  cmd_tag->add_option("--shadow", tag_shadow, "shadow id")->required();
  cmd_tag->add_option("--kind", tag_kind, "Perspective:Kind")->required();

  bool link_strong = false, link_weak = false;
  std::string link_from, link_to, link_evidence;
  auto* cmd_link = app.add_subcommand("link", "declare an E-tag between two WIDs");
  cmd_link->add_flag("--strong", link_strong, "bidirectional equivalence");
  cmd_link->add_flag("--weak", link_weak, "directed: --from's meaning included in --to's");
  cmd_link->add_option("--from", link_from, "WID")->required();
  cmd_link->add_option("--to", link_to, "WID")->required();
  cmd_link->add_option("--evidence", link_evidence, "evidence text or @file")->required();

  std::uint64_t unlink_id = 0;
  std::string unlink_reason;
  auto* cmd_unlink = app.add_subcommand("unlink", "revoke an E-tag");
  cmd_unlink->add_option("etag", unlink_id, "E-tag id")->required();
  cmd_unlink->add_option("--reason", unlink_reason, "revocation reason")->required();

  std::string query_text, query_format = "table";
  auto* cmd_query = app.add_subcommand("query", "run a query");
  cmd_query->add_option("-e,--expr", query_text, "query text")->required();
  cmd_query->add_option("--format", query_format, "table|json|xml-tags");

  auto* cmd_repl = app.add_subcommand("repl", "interactive query loop");

  std::string infer_wid;
  auto* cmd_infer = app.add_subcommand("infer", "materialize level-shifted instances");
  cmd_infer->add_option("wid", infer_wid, "#wid of the composite instance")->required();

  std::string compose_a, compose_b;
  auto* cmd_compose = app.add_subcommand("compose-check", "composition-trap verdict for two WIDs");
  cmd_compose->add_option("a", compose_a, "#wid")->required();
  cmd_compose->add_option("b", compose_b, "#wid")->required();

  std::string explain_target;
  bool q_who = false, q_what = false, q_when = false, q_where = false, q_why = false,
       q_how = false, explain_prose = false;
  auto* cmd_explain = app.add_subcommand("explain", "who/what/when/where/why for a target");
  cmd_explain->add_option("target", explain_target, "#wid | wid:N | shadow:N | etag:N")->required();
  cmd_explain->add_flag("--who", q_who);
  cmd_explain->add_flag("--what", q_what);
  cmd_explain->add_flag("--when", q_when);
  cmd_explain->add_flag("--where", q_where);
  cmd_explain->add_flag("--why", q_why);
  cmd_explain->add_flag("--how", q_how);
  cmd_explain->add_flag("--prose", explain_prose, "render prose instead of JSON");

  auto* cmd_check = app.add_subcommand("check", "region-property report; non-zero on violations");

  auto* cmd_fixtures = app.add_subcommand("fixtures", "bundled corpora");
  std::string fixture_name;
  cmd_fixtures->add_option("name", fixture_name, "corpus name (ecid)")->required();

  std::uint64_t purge_id = 0;
  bool purge_confirmed = false;
  auto* cmd_purge = app.add_subcommand("purge", "administrative physical deletion of values");
  cmd_purge->add_option("shadow", purge_id, "shadow id")->required();
  cmd_purge->add_flag("--yes", purge_confirmed, "explicit confirmation");

  auto* cmd_dump = app.add_subcommand("dump", "canonical serialization of the store state");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return 0;  // --help
    std::cerr << json{{"code", "Usage"}, {"message", e.what()}}.dump() << "\n";
    return 2;
  }

  std::unique_ptr<Engine> engine;
  try {
    engine = std::make_unique<Engine>(std::filesystem::path(store_path));
  } catch (const std::exception& e) {
    return fail(Errc::IoError, e.what());
  }

  auto ctx = make_ctx(engine->store(), process_name, rule_id);
  if (!ctx) return fail(ctx.error());

  if (cmd_init->parsed()) {
    std::cout << json{{"store", store_path}, {"events", engine->log().size()}}.dump() << "\n";
    return 0;
  }

  if (cmd_schema_apply->parsed()) {
    if (auto r = apply_manifest_file(*engine, *ctx, manifest_path); !r) return fail(r.error());
    std::cout << json{{"applied", manifest_path}}.dump() << "\n";
    return 0;
  }

  if (cmd_load->parsed()) {
    FeedOptions options;
    options.strict = strict;
    options.hold_ref_schema = hold_schema;
    options.hold_ref_column = hold_column;
    auto report = load_feed_file(*engine, *ctx, feed_path, options);
    if (!report) return fail(report.error());
    std::cout << report->to_json().dump() << "\n";
    return report->errors.empty() ? 0 : 1;
  }

  if (cmd_tag->parsed()) {
    auto kind = engine->store().kind_by_qualified(tag_kind);
    if (!kind) return fail(Errc::NameError, "unknown kind \"" + tag_kind + "\"");
    auto wid = engine->attach_wtag(*ctx, tag_shadow, *kind);
    if (!wid) return fail(wid.error());
    std::cout << json{{"wid", *wid}}.dump() << "\n";
    return 0;
  }

  if (cmd_link->parsed()) {
    if (link_strong == link_weak) {
      return fail(Errc::InvalidArgument, "exactly one of --strong/--weak required");
    }
    auto from = parse_wid(link_from);
    auto to = parse_wid(link_to);
    if (!from) return fail(from.error());
    if (!to) return fail(to.error());
    EvidenceRecord ev;
    ev.kind = EvidenceRecord::Kind::HumanDecision;
    ev.body = read_evidence_text(link_evidence);
    auto etag = engine->assert_etag(*ctx, *from, *to,
                                    link_strong ? EtagKind::Strong : EtagKind::Weak, {ev});
    if (!etag) return fail(etag.error());
    std::cout << json{{"etag", *etag}}.dump() << "\n";
    return 0;
  }

  if (cmd_unlink->parsed()) {
    if (auto r = engine->revoke_etag(*ctx, unlink_id, unlink_reason); !r) return fail(r.error());
    std::cout << json{{"revoked", unlink_id}}.dump() << "\n";
    return 0;
  }

  if (cmd_query->parsed()) {
    return run_query_text(*engine, *ctx, query_text, query_format);
  }

  if (cmd_repl->parsed()) {
    std::string line;
    while (std::getline(std::cin, line)) {
      if (line == "exit" || line == "quit") break;
      if (line.empty()) continue;
      run_query_text(*engine, *ctx, line, "table");
    }
    return 0;
  }

  if (cmd_infer->parsed()) {
    auto wid = parse_wid(infer_wid);
    if (!wid) return fail(wid.error());
    auto derived = infer_level_shift(*engine, *ctx, *wid);
    if (!derived) return fail(derived.error());
    json out = json::array();
    for (Wid w : *derived) {
      const WTagInstance* inst = engine->store().instance(w);
      json shifts = json::array();
      for (const auto& s : inst->derivation->shifts) {
        shifts.push_back({{"original", s.original},
                          {"shifted_to", s.shifted_to},
                          {"direction", s.direction == ComponentShift::Direction::Upward
                                            ? "upward"
                                            : "downward"}});
      }
      out.push_back({{"wid", w},
                     {"kind", engine->store().qualified_kind_name(inst->kind)},
                     {"base", inst->derivation->base},
                     {"shifts", shifts}});
    }
    std::cout << out.dump(2) << "\n";
    return 0;
  }

  if (cmd_compose->parsed()) {
    auto a = parse_wid(compose_a);
    auto b = parse_wid(compose_b);
    if (!a) return fail(a.error());
    if (!b) return fail(b.error());
    const CompositionVerdict v = check_composition(engine->store(), *a, *b);
    json out;
    out["verdict"] = v.kind == CompositionVerdict::Kind::Entailed ? "Entailed"
                     : v.kind == CompositionVerdict::Kind::DecisionRequired
                         ? "DecisionRequired"
                         : "NotRelated";
    if (v.proof) {
      json steps = json::array();
      for (const auto& s : v.proof->steps) {
        steps.push_back({{"via", s.via == ProofStep::Via::Relation ? "relation" : "etag"},
                         {"id", s.id},
                         {"from", s.from},
                         {"to", s.to}});
      }
      out["proof"] = steps;
    }
    if (!v.boundary.empty()) out["boundary_etags"] = v.boundary;
    std::cout << out.dump(2) << "\n";
    return 0;
  }

  if (cmd_explain->parsed()) {
    auto target = parse_explain_target(explain_target);
    if (!target) return fail(target.error());
    QuestionSet questions{q_who, q_what, q_when, q_where, q_why, q_how};
    auto explanation = explain(engine->store(), engine->log(), *target, questions);
    if (!explanation) return fail(explanation.error());
    if (explain_prose) {
      std::cout << explanation->prose;
    } else {
      std::cout << explanation->structured.dump(2) << "\n";
    }
    return 0;
  }

  if (cmd_check->parsed()) {
    const PropertyReport report = check_properties(engine->store());
    std::cout << report.to_text();
    return report.has_violation() ? 1 : 0;
  }

  if (cmd_fixtures->parsed()) {
    if (fixture_name != "ecid") {
      return fail(Errc::InvalidArgument, "unknown fixture \"" + fixture_name + "\"");
    }
    auto fx = build_ecid_fixture(*engine);
    if (!fx) return fail(fx.error());
    std::cout << json{{"fixture", "ecid"},
                      {"events", engine->log().size()},
                      {"contract_row_wid", fx->contract_row_wid},
                      {"legal_row_wid", fx->legal_row_wid}}
                     .dump()
              << "\n";
    return 0;
  }

  if (cmd_purge->parsed()) {
    if (auto r = engine->purge_shadow(*ctx, purge_id, purge_confirmed); !r) {
      return fail(r.error());
    }
    std::cout << json{{"purged", purge_id}}.dump() << "\n";
    return 0;
  }

  if (cmd_dump->parsed()) {
    std::cout << engine->store().serialize() << "\n";
    return 0;
  }

  return 2;
}
