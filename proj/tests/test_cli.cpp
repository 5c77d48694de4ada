#include <doctest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <string>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
  int code;
  std::string out;
};

Run run(const std::string& args, const std::string& env = {}) {
  std::string command = env + (env.empty() ? "" : " ") + DELCHECK_BINARY + " " + args + " 2>/dev/null";
  FILE* pipe = popen(command.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string out;
  std::array<char, 4096> buf{};
  while (std::size_t n = fread(buf.data(), 1, buf.size(), pipe)) out.append(buf.data(), n);
  int status = pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

class Workdir {
 public:
  Workdir() : path_(fs::temp_directory_path() / ("delcheck_cli_" + std::to_string(::getpid()))) {
    fs::create_directories(path_);
  }
  ~Workdir() { fs::remove_all(path_); }

  std::string write(const std::string& name, const std::string& text) const {
    std::ofstream(path_ / name) << text;
    return (path_ / name).string();
  }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  fs::path path_;
};

json coin_doc() {
  return json::parse(R"({
    "agents": ["a", "b"],
    "props": ["z", "h"],
    "models": {"main": {"s5": true, "worlds": ["w1", "w2"],
                        "relations": {"a": [["w1", "w2"]], "b": []},
                        "valuation": {"w1": ["z"]}, "designated": ["w1"]}},
    "events": {"flip": {"s5": true, "events": ["e1", "e2"], "relations": {"a": [["e1", "e2"]], "b": []},
                        "pre": {"e1": "top", "e2": "top"}, "post": {"e1": ["h"], "e2": ["~h"]},
                        "designated": ["e1"]}},
    "formula": "K b z"
  })");
}

json read(const std::string& path) {
  std::ifstream in(path);
  return json::parse(in);
}

}  // namespace

TEST_CASE("check exit codes") {
  Workdir dir;
  json doc = coin_doc();
  std::string coin = dir.write("coin.json", doc.dump());
  CHECK(run("check " + coin).code == 0);
  CHECK(run("check " + coin + " --formula 'K a z'").code == 1);
  CHECK(run("check " + coin + " --engine fast").code == 2);

  doc["expected"] = false;
  std::string wrong = dir.write("wrong.json", doc.dump());
  CHECK(run("check --expect " + wrong).code == 3);
  doc["expected"] = true;
  CHECK(run("check --expect " + dir.write("right.json", doc.dump())).code == 0);

  CHECK(run("check " + dir.write("broken.json", "{ not json")).code == 2);
  CHECK(run("check " + dir.file("absent.json")).code == 2);
  CHECK(run("frobnicate").code == 2);
}

TEST_CASE("check --json report") {
  Workdir dir;
  std::string coin = dir.write("coin.json", coin_doc().dump());
  Run r = run("--json check " + coin);
  json report = json::parse(r.out);
  CHECK(report["verdict"] == true);
  CHECK(report["engine"] == "naive");
  CHECK(report.contains("ms"));
  CHECK(report.contains("recursive_calls"));
  CHECK(report.contains("product_worlds_materialized"));
  CHECK_FALSE(report.contains("memo_entries"));

  json single = coin_doc();
  single["agents"] = {"a"};
  single["models"]["main"]["relations"].erase("b");
  single["events"].clear();
  single["formula"] = "Khat a ~z";
  std::string path = dir.write("single.json", single.dump());
  r = run("--json check --engine fast " + path);
  CHECK(r.code == 0);
  report = json::parse(r.out);
  CHECK(report["engine"] == "fast");
  CHECK(report.contains("memo_entries"));

  r = run("--json check --engine fast " + coin);
  report = json::parse(r.out);
  CHECK(report.contains("error"));
  CHECK(report["error"].get<std::string>().find("two agents") != std::string::npos);
  CHECK_FALSE(report.contains("verdict"));
}

TEST_CASE("update") {
  Workdir dir;
  std::string coin = dir.write("coin.json", coin_doc().dump());
  std::string product = dir.file("product.json");
  CHECK(run("update " + coin + " " + coin + " -o " + product).code == 0);
  json p = read(product);
  CHECK(p["models"]["main"]["worlds"].size() == 4);
  CHECK(p["models"]["main"]["valuation"]["w1|e1"] == json({"h", "z"}));

  json never = coin_doc();
  never["events"]["flip"]["pre"] = {{"e1", "bot"}, {"e2", "bot"}};
  std::string never_path = dir.write("never.json", never.dump());
  CHECK(run("update " + coin + " " + never_path + " -o " + product).code == 1);
  CHECK(read(product)["models"]["main"]["worlds"].empty());
}

TEST_CASE("reduce") {
  Workdir dir;
  std::string q = dir.write("q.txt", "prefix: e x1 a x2\nmatrix: x1\n");
  std::string out = dir.file("inst.json");
  CHECK(run("reduce " + q + " --construction multi1 -o " + out).code == 0);
  CHECK(read(out)["expected"] == true);
  CHECK(run("check --expect " + out).code == 0);

  CHECK(run("reduce " + q + " --construction multi1 --no-oracle -o " + out).code == 0);
  CHECK(read(out)["expected"].is_null());

  std::string unsat = dir.write("unsat.txt", "(p & ~p)\n");
  CHECK(run("reduce " + unsat + " --construction delta2 -o " + out).code == 2);

  std::string big = dir.write("big.txt", "prefix: e x1 a x2 e x3 a x4 e x5 a x6\nmatrix: (x1 & (x3 | x5))\n");
  CHECK(run("reduce " + big + " --construction semiprivate -o " + out).code == 4);
  CHECK(run("reduce " + q + " --construction single2 -o " + out, "DELCHECK_MAX_WORLDS=10").code == 4);
  CHECK(run("reduce " + q + " --construction single2 -o " + out).code == 0);
  CHECK(run("reduce " + q + " --construction nonsense -o " + out).code == 2);
}

TEST_CASE("oracle commands") {
  Workdir dir;
  CHECK(run("qbf " + dir.write("t.txt", "prefix: e x1 a x2\nmatrix: (x1 | x2)\n")).code == 0);
  CHECK(run("qbf " + dir.write("f.txt", "prefix: e x1 a x2\nmatrix: (x1 & x2)\n")).code == 1);
  Run r = run("lexmax " + dir.write("l.txt", "(x1 | x2)\n"));
  CHECK(r.code == 0);
  CHECK(r.out == "x1=1 x2=1\n");
  CHECK(run("lexmax " + dir.write("u.txt", "(x1 & ~x1)\n")).code == 1);

  std::string coin = dir.write("coin.json", coin_doc().dump());
  CHECK(run("bisim " + coin + " w1 " + coin + " w1").code == 0);
  CHECK(run("bisim " + coin + " w1 " + coin + " w2").code == 1);
}

TEST_CASE("validate") {
  Workdir dir;
  CHECK(run("validate " + dir.write("coin.json", coin_doc().dump())).code == 0);
  json doc = coin_doc();
  doc["models"]["main"]["s5"] = false;
  doc["models"]["main"]["relations"]["a"] = json::array({json::array({"w1", "w2"})});
  CHECK(run("validate " + dir.write("k.json", doc.dump())).code == 1);
}

TEST_CASE("bench") {
  Workdir dir;
  std::string csv = dir.file("bench.csv");
  REQUIRE(run("--quiet bench --family nested --k 4..10 -o " + csv).code == 0);
  std::ifstream in(csv);
  std::string header;
  std::getline(in, header);
  CHECK(header == "family,k,engine,verdict,ms,calls,memo_entries");
  std::map<std::string, std::vector<std::pair<std::string, unsigned long long>>> by_engine;
  for (std::string line; std::getline(in, line);) {
    std::vector<std::string> cells;
    std::stringstream s(line);
    for (std::string cell; std::getline(s, cell, ',');) cells.push_back(cell);
    by_engine[cells[2]].emplace_back(cells[3], std::stoull(cells[5]));
  }
  auto& naive = by_engine["naive"];
  auto& fast = by_engine["fast"];
  REQUIRE(naive.size() == 7);
  REQUIRE(fast.size() == 7);
  for (std::size_t i = 0; i < 7; ++i) CHECK(naive[i].first == fast[i].first);
  for (std::size_t i = 1; i < 7; ++i) CHECK(naive[i].second >= 2 * naive[i - 1].second);
  for (std::size_t i = 2; i < 7; ++i) {
    long long d1 = static_cast<long long>(fast[i].second - fast[i - 1].second);
    long long d0 = static_cast<long long>(fast[i - 1].second - fast[i - 2].second);
    CHECK(std::llabs(d1 - d0) <= 2);
  }
}
