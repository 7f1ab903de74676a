#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <boost/multiprecision/cpp_dec_float.hpp>
#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <random>
#include <set>
#include <sstream>

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct Run {
  int code = -1;
  std::string out;
  json doc;
};

fs::path scratch(const std::string& tag) {
  auto d = fs::temp_directory_path() / ("apfive-cli-" + tag + "-" + std::to_string(std::random_device{}()));
  fs::create_directories(d);
  return d;
}

Run run(const std::string& args) {
  std::string cmd = std::string("APFIVE_OFFLINE=1 '") + APFIVE_CLI_PATH + "' " + args + " 2>/dev/null";
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p);
  char buf[4096];
  size_t n;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  int st = pclose(p);
  r.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  if (!r.out.empty()) r.doc = json::parse(r.out, nullptr, false);
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const json* find_branch(const json& doc, const std::string& id) {
  for (const auto& b : doc["branches"])
    if (b["branch"] == id) return &b;
  return nullptr;
}

int kron(long a, long p) {
  long r = 1, b = ((a % p) + p) % p;
  for (long e = (p - 1) / 2; e; e >>= 1, b = b * b % p)
    if (e & 1) r = r * b % p;
  return r == 1 ? 1 : -1;
}

bool is_prime(long n) {
  if (n < 2) return false;
  for (long q = 2; q * q <= n; ++q)
    if (n % q == 0) return false;
  return true;
}

}  // namespace

TEST_CASE("analyze") {
  auto one = run("analyze 1");
  CHECK(one.code == 0);
  CHECK(one.doc["N_d"] == "134400");
  CHECK(one.doc["active_primes"] == json::array({2, 5}));

  auto two = run("analyze 2");
  CHECK(two.code == 0);
  std::set<std::string> levels;
  for (const auto& b : two.doc["branches"]) {
    levels.insert(b["level"]["N_f"].get<std::string>());
    bool k2 = b["branch"].get<std::string>().find("k2=2") != std::string::npos;
    CHECK(b["unresolved_by_design"] == !k2);
    if (k2) CHECK(b["level"]["N_f"] == "2805");
  }
  CHECK(levels.count("2805"));

  auto three = run("analyze 3");
  const json* b = find_branch(three.doc, "k2=1,k5=5,k7=7");
  REQUIRE(b);
  CHECK((*b)["level"]["N_f"] == "14560");
  CHECK((*b)["level"]["delta"] == 5);
  CHECK((*b)["equation"]["A"] == "5^(4p-5)*7^(4p-10)*13");
  CHECK((*b)["frey"]["discriminant_valuations"]["5"] == "4p-5");
}

TEST_CASE("usage errors") {
  CHECK(run("analyze 0").code == 1);
  CHECK(run("").code == 1);
  CHECK(run("frobnicate 3").code == 1);
  CHECK(run("search 3 --x 5 --r 5 --p 4").code == 1);
  CHECK(run("eliminate 3 --branch k2=3").code == 1);
  CHECK(run("eliminate 3 --secondary").code == 1);
  CHECK(run("eliminate 3 --aux-bound 2").code == 1);
  CHECK(run("bound 0").code == 1);
}

TEST_CASE("bound") {
  auto b = run("bound 1");
  CHECK(b.code == 0);
  CHECK(b.doc["mu"] == "368640");
  CHECK(b.doc["N_d"] == "134400");
  CHECK(b.doc["three_adic"]["applicable"] == true);
  CHECK(b.doc["three_adic"]["rational_forms_bound"] == 7);
  using D = boost::multiprecision::cpp_dec_float_50;
  D want = D(134401) / 6 * log10(sqrt(D(61440)) + 1);
  D got(b.doc["log10_bound"].get<std::string>());
  CHECK(abs(got - want) / want < D("1e-6"));

  auto four = run("bound 4");
  CHECK(four.code == 0);
  CHECK(four.doc["three_adic"]["applicable"] == false);
}

TEST_CASE("search") {
  auto s = run("search 3 --x 50 --r 50 --p 11,13");
  CHECK(s.code == 0);
  CHECK(s.doc["solutions"].empty());
  auto sq = run("search 1 --x 30 --r 30 --p 2");
  CHECK(sq.code == 0);
  for (const auto& e : sq.doc["solutions"]) {
    long x = std::stol(e["x"].get<std::string>()), r = std::stol(e["r"].get<std::string>());
    long y = std::stol(e["y"].get<std::string>());
    long sum = 0;
    for (long i = -1; i <= 1; ++i) {
      long t = x + i * r;
      sum += t * t * t * t * t;
    }
    CHECK(sum == y * y);
  }
}

TEST_CASE("fetch is idempotent") {
  auto cache = scratch("fetch");
  auto first = run("--cache-dir '" + cache.string() + "' fetch 130");
  CHECK(first.code == 0);
  fs::path file = first.doc["cache_file"].get<std::string>();
  REQUIRE(fs::exists(file));
  auto bytes = slurp(file);
  auto stamp = fs::last_write_time(file);
  auto second = run("--cache-dir '" + cache.string() + "' fetch 130");
  CHECK(second.code == 0);
  CHECK(second.out == first.out);
  CHECK(slurp(file) == bytes);
  CHECK(fs::last_write_time(file) == stamp);
  CHECK(run("--cache-dir '" + cache.string() + "' fetch 99991").code == 3);
  fs::remove_all(cache);
}

TEST_CASE("eliminate one branch, deterministic output") {
  auto cache = scratch("elim");
  std::string args = "--cache-dir '" + cache.string() + "' eliminate 3 --branch k2=2,k5=5,k7=1";
  auto a = run(args);
  CHECK(a.code == 0);
  const json& b = a.doc["branches"][0];
  CHECK(b["status"] == "ELIMINATED");
  CHECK(b["primary"]["level"]["N_f"] == "130");
  CHECK(a.doc["overall_bound"] == b["bound"]);
  auto again = run(args);
  CHECK(again.out == a.out);

  auto file = cache / "report.json";
  auto c = run(args + " --output '" + file.string() + "'");
  CHECK(c.code == 0);
  CHECK(c.out.empty());
  CHECK(slurp(file) == a.out);
  fs::remove_all(cache);
}

TEST_CASE("branches left open by design") {
  auto r = run("eliminate 2");
  CHECK(r.code == 2);
  CHECK(r.doc["overall_bound"] == "UNRESOLVED");
  for (const auto& b : r.doc["branches"]) {
    bool k2 = b["branch"].get<std::string>().find("k2=2") != std::string::npos;
    CHECK(b["status"] == (k2 ? "ELIMINATED" : "UNRESOLVED-BY-DESIGN"));
  }
  CHECK(r.doc["conclusion"].get<std::string>().find("2 does not divide x") == 0);
}

TEST_CASE("missing level data is a data error") {
  auto cache = scratch("cold");
  auto r = run("--cache-dir '" + cache.string() + "' eliminate 3 --branch k2=1,k5=1,k7=7");
  CHECK(r.code == 3);
  CHECK(r.doc["branches"][0]["status"] == "UNAVAILABLE");
  fs::remove_all(cache);
}

TEST_CASE("symplectic post-processing") {
  auto r = run("eliminate 3 --branch k2=1,k5=5,k7=7 --symplectic");
  CHECK(r.code == 2);
  const json& b = r.doc["branches"][0];
  std::set<std::string> with_curve;
  for (const auto& s : b["symplectic"]) {
    if (!s["has_curve"].get<bool>()) continue;
    with_curve.insert(s["form"].get<std::string>());
    std::set<long> surv(s["surviving_p"].begin(), s["surviving_p"].end());
    for (long p = 23; p < 500; ++p)
      if (is_prime(p) && kron(-5, p) == -1 && (kron(2, p) == 1 || kron(3, p) == 1)) CHECK(!surv.count(p));
  }
  CHECK(with_curve == std::set<std::string>{"14560.2.a.j", "14560.2.a.k", "14560.2.a.q", "14560.2.a.r", "14560.2.a.s"});
}

TEST_CASE("configuration precedence") {
  auto dir = scratch("cfg");
  auto cfg = dir / "apfive.conf";
  std::ofstream(cfg) << "# test\naux_bound = 50\nthreshold = 500\ncache_dir = " << (dir / "cache").string() << "\n";
  auto r = run("--config '" + cfg.string() + "' eliminate 3 --branch k2=2,k5=5,k7=1");
  CHECK(r.code == 0);
  CHECK(r.doc["aux_bound"] == 50);
  CHECK(r.doc["threshold"] == 500);
  CHECK(fs::exists(dir / "cache"));
  auto flag = run("--config '" + cfg.string() + "' eliminate 3 --branch k2=2,k5=5,k7=1 --aux-bound 60");
  CHECK(flag.doc["aux_bound"] == 60);

  std::ofstream(dir / "bad.conf") << "colour = blue\n";
  CHECK(run("--config '" + (dir / "bad.conf").string() + "' analyze 3").code == 1);
  CHECK(run("--config '" + (dir / "missing.conf").string() + "' analyze 3").code == 3);
  fs::remove_all(dir);
}
