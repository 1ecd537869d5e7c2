#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "scaffcite/data.hpp"
#include "scaffcite/errors.hpp"
#include "scaffcite/run_config.hpp"

using namespace scaffcite;
using namespace scaffcite::data;

namespace {

struct TempFile {
  std::filesystem::path path;
  explicit TempFile(const std::string& name, const std::string& content) {
    path = std::filesystem::temp_directory_path() / name;
    std::ofstream out(path);
    out << content;
  }
  ~TempFile() { std::filesystem::remove(path); }
  std::string str() const { return path.string(); }
};

}  // namespace

TEST_CASE("tokenize rules") {
  CHECK(tokenize("We use X.") == std::vector<std::string>{"we", "use", "x", "."});
  CHECK(tokenize("").empty());
  CHECK(tokenize("described in [4].") == std::vector<std::string>{"described", "in", "[4]", "."});
  CHECK(tokenize("(see [3,5])") == std::vector<std::string>{"(", "see", "[3,5]", ")"});
  CHECK(tokenize("state-of-the-art") == std::vector<std::string>{"state-of-the-art"});
  CHECK(tokenize("ranges [25-27] hold") == std::vector<std::string>{"ranges", "[25-27]", "hold"});
}

TEST_CASE("tokenize is idempotent over its own joined output") {
  const std::vector<std::string> sentences = {
      "We use X.", "described in [4].", "A (complex), example: with [1-4] markers!",
      "Mixed CASE and   spaces"};
  for (const auto& s : sentences) {
    auto once = tokenize(s);
    CHECK(tokenize(join_tokens(once)) == once);
  }
}

TEST_CASE("vocabulary build ordering and round trip") {
  Vocabulary empty = Vocabulary::build({}, 1);
  CHECK(empty.size() == 2);  // exactly PAD and UNK
  CHECK(empty.token(Vocabulary::kPad) == "<pad>");
  CHECK(empty.token(Vocabulary::kUnk) == "<unk>");

  Vocabulary v = Vocabulary::build({{"a", "a", "b"}}, 2);
  CHECK(v.contains("a"));
  CHECK(!v.contains("b"));
  CHECK(v.id("b") == Vocabulary::kUnk);

  Vocabulary w = Vocabulary::build({{"c", "b", "b", "a", "c", "b"}}, 1);
  // b (3) first, then c (2), then a (1)
  CHECK(w.id("b") == 2);
  CHECK(w.id("c") == 3);
  CHECK(w.id("a") == 4);

  const std::vector<std::string> sent{"b", "a", "c"};
  CHECK(w.decode(w.encode(sent)) == sent);

  // frequency ties order lexicographically
  Vocabulary t = Vocabulary::build({{"zeta", "alpha"}}, 1);
  CHECK(t.id("alpha") == 2);
  CHECK(t.id("zeta") == 3);
}

TEST_CASE("vocabulary hash is stable and order sensitive") {
  Vocabulary a = Vocabulary::from_tokens({"x", "y"});
  Vocabulary b = Vocabulary::from_tokens({"x", "y"});
  Vocabulary c = Vocabulary::from_tokens({"y", "x"});
  CHECK(a.hash() == b.hash());
  CHECK(a.hash() != c.hash());
}

TEST_CASE("read_citations_jsonl") {
  TempFile file("scf_citations.jsonl",
                R"({"string": "We follow [3].", "label": "method", "sectionName": "Methods", "id": "a1", "extended_context": "We follow [3]. It works."}
{"string": "Prior art exists.", "label": "background"}
)");
  auto instances = read_citations_jsonl(file.str(), {"background", "method", "result"});
  REQUIRE(instances.size() == 2);
  CHECK(instances[0].id == "a1");
  CHECK(instances[0].label == "method");
  CHECK(instances[0].section_name == "Methods");
  // surrounding context rides along but never reaches the model
  CHECK(instances[0].extended_context == "We follow [3]. It works.");
  CHECK(instances[1].label == "background");
  CHECK(instances[1].id == "line-2");

  TempFile bad_label("scf_bad_label.jsonl", R"({"string": "x", "label": "Uses"}
)");
  CHECK_THROWS_WITH_AS(read_citations_jsonl(bad_label.str(), {"background"}),
                       doctest::Contains(":1"), DataError);

  TempFile malformed("scf_malformed.jsonl", "{not json}\n");
  CHECK_THROWS_AS(read_citations_jsonl(malformed.str(), {"background"}), FormatError);

  TempFile empty("scf_empty.jsonl", "");
  CHECK(read_citations_jsonl(empty.str(), {"background"}).empty());
}

TEST_CASE("reading a file twice gives identical instances") {
  TempFile file("scf_twice.jsonl",
                R"({"string": "We follow [3].", "label": "method", "id": "a"}
{"string": "Compared against prior work.", "label": "result", "id": "b"}
)");
  auto first = read_citations_jsonl(file.str(), {"method", "result"});
  auto second = read_citations_jsonl(file.str(), {"method", "result"});
  REQUIRE(first.size() == second.size());
  for (std::size_t i = 0; i < first.size(); ++i) {
    CHECK(first[i].id == second[i].id);
    CHECK(first[i].text == second[i].text);
    CHECK(first[i].label == second[i].label);
  }
}

TEST_CASE("load_word_vectors") {
  Vocabulary v = Vocabulary::from_tokens({"the", "unseen"});

  TempFile vectors("scf_vectors.txt", "the 0.1 0.2\nextra -1.0 2.5\n");
  nn::TokenEmbeddingTable table = load_word_vectors(vectors.str(), v, false, 99);
  CHECK(table.dim == 2);
  CHECK(table.rows->value.at(2, 0) == doctest::Approx(0.1));
  CHECK(table.rows->value.at(2, 1) == doctest::Approx(0.2));
  // PAD and UNK rows stay zero
  CHECK(table.rows->value.at(0, 0) == 0.0);
  CHECK(table.rows->value.at(1, 1) == 0.0);

  // out-of-file token row is random but reproducible
  nn::TokenEmbeddingTable again = load_word_vectors(vectors.str(), v, false, 99);
  CHECK(table.rows->value.at(3, 0) == again.rows->value.at(3, 0));
  CHECK(table.rows->value.at(3, 0) != 0.0);
  CHECK(std::abs(table.rows->value.at(3, 0)) <= 0.1);

  TempFile ragged("scf_ragged.txt", "the 0.1 0.2\nbad 1.0\n");
  CHECK_THROWS_WITH_AS(load_word_vectors(ragged.str(), v, false, 1), doctest::Contains(":2"),
                       FormatError);
}

TEST_CASE("label-set presets") {
  CHECK(cli::parse_label_set("scicite").size() == 3);
  CHECK(cli::parse_label_set("acl-arc").size() == 6);
  CHECK(cli::parse_label_set("a, b ,c") == std::vector<std::string>{"a", "b", "c"});
}

TEST_CASE("run config parsing and overrides") {
  TempFile config("scf_config.txt",
                  "# comment\n"
                  "data.labels = scicite\n"
                  "train.seed = 99  # inline comment\n"
                  "model.hidden_dim = 50\n");
  auto kv = cli::parse_config_file(config.str());
  cli::RunConfig run = cli::make_run_config(kv);
  CHECK(run.labels.size() == 3);
  CHECK(run.train.seed == 99);
  CHECK(run.train.hidden_dim == 50);
  CHECK(run.train.batch_size == 8);  // default

  kv["trian.seed"] = "1";  // typo
  CHECK_THROWS_AS(cli::make_run_config(kv), ContractError);
}

TEST_CASE("sidecar store") {
  TempFile sidecar("scf_sidecar.jsonl",
                   R"({"id": "a1", "vectors": [[1.0, 2.0], [3.0, 4.0]]}
{"id": "a2", "vectors": [[0.5, 0.5]]}
)");
  SidecarStore store = SidecarStore::load(sidecar.str());
  CHECK(store.dim() == 2);
  CHECK(store.require("a1", 2)[1][0] == 3.0);
  CHECK_THROWS_WITH_AS(store.require("a1", 3), doctest::Contains("a1"), DataError);
  CHECK_THROWS_WITH_AS(store.require("missing", 1), doctest::Contains("missing"), DataError);
}
