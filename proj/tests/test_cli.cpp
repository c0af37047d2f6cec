#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cli.hpp"
#include "fixtures.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = rnncert::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path workdir() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / "rnncert_cli_test";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string p(const std::string& name) { return (workdir() / name).string(); }

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

json load(const std::string& path) { return json::parse(slurp(path)); }

void make_fixture(const std::string& kind) {
  const auto r = cli({"generate", "--kind", kind, "--n", "2", "--s", "3", "--m", "2", "--t", "3", "--seed", "5",
                      "--output", p(kind + ".json"), "--inputs", "2", "--input-dir", p(kind + "_in")});
  REQUIRE(r.code == 0);
}

}  // namespace

TEST_CASE("certify writes positive certificates and a summary") {
  make_fixture("rnn");
  const auto r = cli({"certify", "--model", p("rnn.json"), "--input", p("rnn_in/input_0.json"), "--p", "inf",
                      "--output", p("cert.json")});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("mean=") != std::string::npos);
  const json doc = load(p("cert.json"));
  CHECK(doc["command"] == "certify");
  CHECK(doc["seed"] == 0);
  CHECK(doc["results"][0]["result"]["certified_epsilon"].get<double>() > 0.0);
  CHECK(doc["results"][0]["result"]["verified"] == true);
}

TEST_CASE("frame sweep writes an m-row CSV") {
  make_fixture("gru");
  const auto r = cli({"certify", "--model", p("gru.json"), "--input", p("gru_in/input_0.json"), "--frames", "sweep",
                      "--output", p("sweep.json"), "--csv", p("sweep.csv")});
  REQUIRE(r.code == 0);
  std::istringstream csv(slurp(p("sweep.csv")));
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(csv, line)) lines.push_back(line);
  REQUIRE(lines.size() == 3);
  CHECK(lines[0] == "frame_index,epsilon");
  CHECK(lines[1].rfind("1,", 0) == 0);
  CHECK(lines[2].rfind("2,", 0) == 0);
}

TEST_CASE("targeted mode lists every other class") {
  make_fixture("lstm");
  const auto r = cli({"certify", "--model", p("lstm.json"), "--input", p("lstm_in/input_1.json"), "--mode",
                      "targeted", "--strategy", "lines", "--output", p("targ.json")});
  REQUIRE(r.code == 0);
  const json doc = load(p("targ.json"));
  CHECK(doc["results"][0]["targeted"].size() == 2);
  CHECK(doc["results"][0]["min_epsilon"].get<double>() >= 0.0);
}

TEST_CASE("missing model exits 1 naming the path") {
  const auto r = cli({"certify", "--model", p("nope.json"), "--input", p("rnn_in/input_0.json")});
  CHECK(r.code == 1);
  CHECK(r.err.find("nope.json") != std::string::npos);
}

TEST_CASE("bad arguments exit 1") {
  make_fixture("rnn");
  CHECK(cli({"certify", "--model", p("rnn.json"), "--input", p("rnn_in/input_0.json"), "--p", "0.5"}).code == 1);
  CHECK(cli({"certify", "--model", p("rnn.json"), "--input", p("rnn_in/input_0.json"), "--frames", "9"}).code == 1);
  CHECK(cli({"certify", "--model", p("rnn.json")}).code == 1);
  CHECK(cli({"frobnicate"}).code == 1);
  CHECK(cli({"--help"}).code == 0);
  std::ofstream(p("short.json")) << R"({"frames": [[0.1, 0.2]]})";
  const auto r = cli({"certify", "--model", p("rnn.json"), "--input", p("short.json")});
  CHECK(r.code == 1);
  CHECK(r.err.find("short.json") != std::string::npos);
}

TEST_CASE("numerical overflow exits 2") {
  auto model = rnncert::generate_random_model(1, rnncert::CellKind::Vanilla, 1, 1, 1, 2);
  model.vanilla().W_ax = rnncert::Matrix{{1e14}};
  rnncert::save_model(model, p("huge.json"));
  rnncert::save_sequence({{rnncert::Vector{0.0}}, std::nullopt}, p("huge_x.json"));
  const auto r = cli({"soundcheck", "--model", p("huge.json"), "--input", p("huge_x.json"), "--eps", "1"});
  CHECK(r.code == 2);
  CHECK(r.err.find("step 1") != std::string::npos);
}

TEST_CASE("soundcheck at the certified radius, and attack above it") {
  make_fixture("lstm");
  for (const std::string in : {"input_0.json", "input_1.json"}) {
    REQUIRE(cli({"certify", "--model", p("lstm.json"), "--input", p("lstm_in/" + in), "--p", "2", "--output",
                 p("c.json")})
                .code == 0);
    const double eps = load(p("c.json"))["results"][0]["result"]["certified_epsilon"];
    std::ostringstream e;
    e.precision(17);
    e << eps;
    const auto s = cli({"soundcheck", "--model", p("lstm.json"), "--input", p("lstm_in/" + in), "--p", "2", "--eps",
                        e.str(), "--samples", "20000", "--output", p("s.json")});
    CHECK(s.code == 0);
    CHECK(load(p("s.json"))["violations"] == 0);
    REQUIRE(cli({"attack", "--model", p("lstm.json"), "--input", p("lstm_in/" + in), "--p", "2", "--output",
                 p("a.json")})
                .code == 0);
    const json atk = load(p("a.json"))["results"][0]["result"];
    if (atk["success"] == true) CHECK(atk["distortion"].get<double>() >= eps);
  }
}

TEST_CASE("clever on tied logits scores zero") {
  const auto f = fixtures::tied_logits();
  rnncert::save_model(f.model, p("tied.json"));
  rnncert::save_sequence({f.inputs[0], 0}, p("tied_x.json"));
  const auto r = cli({"clever", "--model", p("tied.json"), "--input", p("tied_x.json"), "--output", p("cl.json")});
  REQUIRE(r.code == 0);
  CHECK(load(p("cl.json"))["results"][0]["result"]["score"] == 0.0);
}

TEST_CASE("outputs are byte-identical across runs and worker counts") {
  make_fixture("gru");
  const std::vector<std::string> base = {"--model", p("gru.json"), "--input", p("gru_in/input_0.json"),
                                         "--input", p("gru_in/input_1.json"), "--seed", "3"};
  for (const std::string cmd : {"certify", "attack", "clever"}) {
    std::vector<std::string> a{cmd}, b{cmd};
    a.insert(a.end(), base.begin(), base.end());
    b.insert(b.end(), base.begin(), base.end());
    a.insert(a.end(), {"--workers", "1", "--output", p(cmd + "_1.json")});
    b.insert(b.end(), {"--workers", "2", "--output", p(cmd + "_2.json")});
    REQUIRE(cli(a).code == 0);
    REQUIRE(cli(b).code == 0);
    CHECK(slurp(p(cmd + "_1.json")) == slurp(p(cmd + "_2.json")));
    const json doc = load(p(cmd + "_1.json"));
    CHECK(doc["results"][0]["input"] == p("gru_in/input_0.json"));
    CHECK(doc["results"][1]["input"] == p("gru_in/input_1.json"));
  }
}

TEST_CASE("worker count from the environment") {
  make_fixture("rnn");
  setenv("RNNCERT_WORKERS", "3", 1);
  const auto r = cli({"certify", "--model", p("rnn.json"), "--input", p("rnn_in/input_0.json"), "--input",
                      p("rnn_in/input_1.json"), "--output", p("env.json")});
  unsetenv("RNNCERT_WORKERS");
  CHECK(r.code == 0);
  CHECK(load(p("env.json"))["results"].size() == 2);
}

TEST_CASE("the installed binary runs") {
  const std::string cmd = std::string(RNNCERT_TOOL) + " certify --model " + p("rnn.json") + " --input " +
                          p("rnn_in/input_0.json") + " --output " + p("bin.json") + " > /dev/null";
  CHECK(std::system(cmd.c_str()) == 0);
  const std::string missing = std::string(RNNCERT_TOOL) + " certify --model " + p("missing.json") + " --input " +
                              p("rnn_in/input_0.json") + " 2> /dev/null";
  const int status = std::system(missing.c_str());
  CHECK(WEXITSTATUS(status) == 1);
}
