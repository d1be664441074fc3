#include <doctest.h>

#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "ff/corpus.hpp"
#include "ff/errors.hpp"
#include "ff/logic.hpp"
#include "test_support.hpp"

using namespace ff;

namespace {

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void spit(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  REQUIRE(out);
  out << text;
}

Statement tbi_ptsd() {
  Statement s;
  s.id = "t001";
  s.domain = Domain::medical();
  s.antecedent = "TBI";
  s.consequent = "PTSD";
  return s;
}

}  // namespace

TEST_CASE("bundled medical sample loads with the documented content") {
  const auto statements = load_corpus(fftest::data_dir() / "medical_sample.jsonl");
  REQUIRE(statements.size() == 5);
  CHECK(statements[0].antecedent == "Atherosclerosis");
  CHECK(statements[0].consequent == "increased risk of heart attack");
  CHECK(statements[0].domain == Domain::medical());
  CHECK(statements[4].antecedent == "Smoking");
  std::set<std::string> ids;
  for (const auto& s : statements) ids.insert(s.id);
  CHECK(ids.size() == 5);
}

TEST_CASE("bundled environmental sample loads with the documented content") {
  const auto statements = load_corpus(fftest::data_dir() / "environmental_sample.jsonl");
  REQUIRE(statements.size() == 5);
  CHECK(statements[0].antecedent == "Melting of polar ice caps");
  CHECK(statements[0].consequent == "rising global sea levels");
  CHECK(statements[0].domain == Domain::environmental());
}

TEST_CASE("corpus loader edge cases") {
  fftest::TempDir dir;

  SUBCASE("empty file gives an empty list") {
    spit(dir.file("empty.jsonl"), "");
    CHECK(load_corpus(dir.file("empty.jsonl")).empty());
  }

  SUBCASE("comments and blank lines are skipped") {
    spit(dir.file("c.jsonl"),
         "# header comment\n\n" + statement_to_json_line(tbi_ptsd()) + "\n");
    CHECK(load_corpus(dir.file("c.jsonl")).size() == 1);
  }

  SUBCASE("duplicate ids are rejected") {
    const std::string line = statement_to_json_line(tbi_ptsd());
    spit(dir.file("dup.jsonl"), line + "\n" + line + "\n");
    CHECK_THROWS_AS(load_corpus(dir.file("dup.jsonl")), DuplicateIdError);
  }

  SUBCASE("malformed JSON reports the line number") {
    spit(dir.file("bad.jsonl"), statement_to_json_line(tbi_ptsd()) + "\nnot json at all\n");
    try {
      load_corpus(dir.file("bad.jsonl"));
      FAIL("expected ParseError");
    } catch (const ParseError& ex) {
      CHECK(ex.line() == 2);
      CHECK(std::string(ex.what()).find("line 2") != std::string::npos);
    }
  }

  SUBCASE("missing required fields are rejected") {
    spit(dir.file("mf.jsonl"), R"({"id":"x1","domain":"medical","antecedent":"TBI"})"
                               "\n");
    CHECK_THROWS_AS(load_corpus(dir.file("mf.jsonl")), MissingFieldError);
  }

  SUBCASE("missing file is an I/O error") {
    CHECK_THROWS_AS(load_corpus(dir.file("nope.jsonl")), IoError);
  }
}

TEST_CASE("prompt rendering matches the documented query form") {
  const Statement tbi = tbi_ptsd();

  const Variant negated = apply_rule(tbi, *rule_from_code("nPnQ"));
  const PromptRecord record = render_prompt(negated, PromptTemplate::standard());
  CHECK(record.prompt_text ==
        "Is the statement \"no TBI implies no PTSD\" correct? "
        "Respond with exactly one word: TRUE or FALSE.");
  CHECK(record.statement_id == "t001");
  CHECK(record.rule_code == "nPnQ");

  const Variant identity = apply_rule(tbi, *rule_from_code("PQ"));
  CHECK(render_prompt(identity, PromptTemplate::standard()).prompt_text.find(
            "\"TBI implies PTSD\"") != std::string::npos);

  // The bare form carries no answer-format instruction.
  const PromptRecord bare = render_prompt(identity, PromptTemplate::bare());
  CHECK(bare.prompt_text.find("Respond") == std::string::npos);
  CHECK(bare.prompt_text.find("\"TBI implies PTSD\"") != std::string::npos);

  PromptTemplate broken;
  broken.text = "no placeholders here";
  CHECK_THROWS_AS(render_prompt(identity, broken), TemplateError);
}

TEST_CASE("expand_corpus is the full statement x rule product") {
  const auto statements = load_corpus(fftest::data_dir() / "medical_sample.jsonl");
  const auto& rules = enumerate_rules();
  const auto records =
      expand_corpus(statements, std::vector<LogicalRule>(rules.begin(), rules.end()));
  REQUIRE(records.size() == 40);

  std::set<std::pair<std::string, std::string>> keys;
  int valid_prompts = 0;
  for (const auto& r : records) {
    keys.insert({r.statement_id, r.rule_code});
    if (r.rule_code == "PQ") ++valid_prompts;
  }
  CHECK(keys.size() == 40);       // every (statement, rule) pair exactly once
  CHECK(valid_prompts == 5);      // one valid variant per statement

  // Grouped by statement, rules in canonical order within each group.
  for (size_t i = 0; i < records.size(); ++i) {
    CHECK(records[i].statement_id == statements[i / 8].id);
    CHECK(records[i].rule_code == enumerate_rules()[i % 8].code());
  }

  // Single statement, single rule: equal to rendering that variant directly.
  const auto single = expand_corpus({statements[0]}, {*rule_from_code("PQ")});
  REQUIRE(single.size() == 1);
  CHECK(single[0] ==
        render_prompt(apply_rule(statements[0], *rule_from_code("PQ")),
                      PromptTemplate::standard()));

  CHECK_THROWS_AS(expand_corpus(statements, {}), Error);
}

TEST_CASE("corpus save/load round-trips the record set and the bytes") {
  fftest::TempDir dir;
  std::mt19937_64 rng(31);
  std::vector<Statement> statements;
  for (int i = 0; i < 50; ++i) statements.push_back(fftest::random_statement(rng, i));

  save_corpus(statements, dir.file("round.jsonl"));
  const auto loaded = load_corpus(dir.file("round.jsonl"));
  CHECK(loaded == statements);

  // Second save is byte-identical: serialization is deterministic.
  save_corpus(loaded, dir.file("round2.jsonl"));
  CHECK(slurp(dir.file("round.jsonl")) == slurp(dir.file("round2.jsonl")));
}

TEST_CASE("plain-text importer accepts the common connectives") {
  fftest::TempDir dir;
  spit(dir.file("raw.txt"),
       "Smoking implies increased risk of lung cancer.\n"
       "Deforestation $\\implies$ reduced carbon sequestration.\n"
       "Drought => crop failure\n"
       "Overfishing -> stock collapse\n"
       "\n"
       "# a comment\n");

  const auto statements = import_plain_text(dir.file("raw.txt"), Domain::medical(), "imp");
  REQUIRE(statements.size() == 4);
  CHECK(statements[0].id == "imp001");
  CHECK(statements[0].antecedent == "Smoking");
  CHECK(statements[0].consequent == "increased risk of lung cancer");  // period stripped
  CHECK(statements[1].antecedent == "Deforestation");
  CHECK(statements[1].consequent == "reduced carbon sequestration");
  CHECK(statements[2].consequent == "crop failure");
  CHECK(statements[3].id == "imp004");
  CHECK(statements[3].antecedent == "Overfishing");

  spit(dir.file("junk.txt"), "no connective on this line\n");
  CHECK_THROWS_AS(import_plain_text(dir.file("junk.txt"), Domain::medical(), "x"), ParseError);
}

TEST_CASE("prompt files round-trip") {
  fftest::TempDir dir;
  const auto statements = load_corpus(fftest::data_dir() / "medical_sample.jsonl");
  const auto& rules = enumerate_rules();
  const auto records =
      expand_corpus(statements, std::vector<LogicalRule>(rules.begin(), rules.end()));

  save_prompts(records, dir.file("prompts.jsonl"));
  CHECK(load_prompts(dir.file("prompts.jsonl")) == records);
}
