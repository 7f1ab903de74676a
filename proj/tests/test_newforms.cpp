#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>
#include <fstream>
#include <httplib.h>
#include <json.hpp>
#include <random>
#include <sstream>
#include <thread>

#include "apfive/error.hpp"
#include "apfive/frey.hpp"
#include "apfive/newforms.hpp"

using namespace apfive;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch_dir(const std::string& tag) {
  static std::mt19937_64 rng(std::random_device{}());
  auto d = fs::temp_directory_path() / ("apfive-test-" + tag + "-" + std::to_string(rng()));
  fs::create_directories(d);
  return d;
}

const std::array<Int, 5> kCurve11{0, -1, 1, -10, -20};

// local stand-in for the remote API
struct MockServer {
  httplib::Server svr;
  std::thread th;
  int port = 0;
  std::atomic<int> flaky_calls{0};
  std::atomic<int> search_calls{0};
  std::vector<std::chrono::steady_clock::time_point> stamps;
  std::mutex mu;

  MockServer() {
    auto stamp = [this] {
      std::lock_guard<std::mutex> l(mu);
      stamps.push_back(std::chrono::steady_clock::now());
    };
    svr.Get("/api/mf_newforms/", [this, stamp](const httplib::Request& req, httplib::Response& res) {
      stamp();
      ++search_calls;
      json page;
      if (!req.has_param("_offset")) {
        json traces = json::array();
        for (long n = 1; n <= 40; ++n) traces.push_back(0);
        traces[1] = -2;  // a_2 of the rational form, the rest filled from point counts
        for (long l : primes_upto(40))
          if (l > 2) traces[l - 1] = l == 11 ? 1 : count_points(kCurve11, l);
        page["data"] = json::array({{{"label", "11.2.a.a"}, {"dim", 1}, {"traces", traces}}});
        page["next"] = "https://mock.invalid/api/mf_newforms/?level=11&_offset=1";
      } else {
        page["data"] = json::array(
            {{{"label", "11.2.a.b"}, {"dim", 2}, {"field_poly", {-1, -1, 1}}, {"hecke_orbit_code", 777}}});
      }
      res.set_content(page.dump(), "application/json");
    });
    svr.Get("/api/mf_hecke_nf/", [stamp](const httplib::Request& req, httplib::Response& res) {
      stamp();
      if (req.get_param_value("hecke_orbit_code") != "777") {
        res.set_content(R"({"data": []})", "application/json");
        return;
      }
      // basis 1, 1 + t; a_p = t everywhere except a_11 = 1
      json ap = json::array();
      for (long l : primes_upto(40)) ap.push_back(l == 11 ? json::array({1, 0}) : json::array({-1, 1}));
      json rec = {{"ap", ap},
                  {"maxp", 40},
                  {"hecke_ring_numerators", {{1, 0}, {1, 1}}},
                  {"hecke_ring_denominators", {1, 1}},
                  {"field_poly", {-1, -1, 1}}};
      res.set_content(json{{"data", json::array({rec})}}.dump(), "application/json");
    });
    svr.Get("/api/ec_curvedata/", [stamp](const httplib::Request& req, httplib::Response& res) {
      stamp();
      if (req.get_param_value("lmfdb_label") == "11.a1") {
        json rec = {{"lmfdb_label", "11.a1"}, {"ainvs", {0, -1, 1, -10, -20}}, {"conductor", 11}};
        res.set_content(json{{"data", json::array({rec})}}.dump(), "application/json");
      } else {
        res.set_content(R"({"data": []})", "application/json");
      }
    });
    svr.Get("/flaky/", [this](const httplib::Request&, httplib::Response& res) {
      if (++flaky_calls < 3) {
        res.status = 500;
        return;
      }
      json traces = json::array();
      for (long n = 1; n <= 40; ++n) traces.push_back(0);
      traces[1] = -2;
      for (long l : primes_upto(40))
        if (l > 2) traces[l - 1] = l == 11 ? 1 : count_points(kCurve11, l);
      res.set_content(json{{"data", json::array({{{"label", "11.2.a.a"}, {"dim", 1}, {"traces", traces}}})}}.dump(),
                      "application/json");
    });
    svr.Get("/down/", [](const httplib::Request&, httplib::Response& res) { res.status = 503; });
    svr.Get("/garbage/", [](const httplib::Request&, httplib::Response& res) {
      res.set_content(R"({"data": [{"label": "11.2.a.a", "dim": 2, "field_poly": [-4, 0, 1], "hecke_orbit_code": 1}]})",
                      "application/json");
    });
    port = svr.bind_to_any_port("127.0.0.1");
    th = std::thread([this] { svr.listen_after_bind(); });
    svr.wait_until_ready();
  }
  ~MockServer() {
    svr.stop();
    th.join();
  }

  StoreConfig config(const fs::path& cache) const {
    StoreConfig c;
    c.cache_dir = cache;
    c.base_url = "http://127.0.0.1:" + std::to_string(port);
    c.prime_bound = 40;
    c.min_spacing = std::chrono::milliseconds(0);
    c.backoff = std::chrono::milliseconds(1);
    c.timeout_seconds = 5;
    return c;
  }
};

std::vector<fs::path> fixture_files() {
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(default_fixture_dir() / "newforms"))
    if (e.path().extension() == ".json") out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

long level_of(const fs::path& p) { return std::stol(p.stem().string().substr(6)); }

}  // namespace

TEST_CASE("fixture files reserialize byte for byte") {
  auto files = fixture_files();
  REQUIRE(files.size() >= 7);
  for (const auto& p : files) {
    std::string text = slurp(p);
    long level = level_of(p);
    auto forms = newforms_from_json(text, level);
    CHECK_FALSE(forms.empty());
    auto doc = json::parse(text);
    CHECK(newforms_to_json(level, doc["prime_bound"], forms, doc["source"]) == text);
    for (const auto& f : forms) {
      CHECK(f.level == level);
      CHECK(f.dim == f.field->degree());
      CHECK(f.prime_bound >= 100);
      CHECK_NOTHROW(validate_newform(f));
    }
  }
}

TEST_CASE("malformed documents name the field") {
  auto doc = json::parse(slurp(default_fixture_dir() / "newforms" / "level_130.json"));
  auto broken = doc;
  broken["newforms"][0].erase("dim");
  try {
    newforms_from_json(broken.dump(), 130);
    FAIL("accepted a form without dim");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Data);
    CHECK(std::string(e.what()).find("newforms[0].dim") != std::string::npos);
  }
  broken = doc;
  broken["newforms"][1]["eigenvalues"][0]["coords"] = json::array({"1", "2"});
  CHECK_THROWS_AS(newforms_from_json(broken.dump(), 130), Error);
  broken = doc;
  broken["format"] = "something-else";
  CHECK_THROWS_AS(newforms_from_json(broken.dump(), 130), Error);
  CHECK_THROWS_AS(newforms_from_json(doc.dump(), 131), Error);
  CHECK_THROWS_AS(newforms_from_json("{not json", 130), Error);
}

TEST_CASE("eigenvalue validation") {
  auto Q = NumberField::make({Int(0), Int(1)});
  Newform f;
  f.label = "11.2.a.a";
  f.level = 11;
  f.dim = 1;
  f.field = Q;
  f.ap.emplace(2, NumberFieldElement(Q, {-2}));
  f.ap.emplace(11, NumberFieldElement(Q, {1}));
  CHECK_NOTHROW(validate_newform(f));
  f.ap.insert_or_assign(2, NumberFieldElement(Q, {3}));
  CHECK_THROWS_AS(validate_newform(f), Error);
  f.ap.insert_or_assign(2, NumberFieldElement(Q, {-2}));
  f.ap.insert_or_assign(11, NumberFieldElement(Q, {-2}));
  CHECK_THROWS_AS(validate_newform(f), Error);

  auto K = NumberField::make({Int(-1), Int(-1), Int(1)});
  Newform g;
  g.label = "5.2.a.b";
  g.level = 5;
  g.dim = 2;
  g.field = K;
  g.ap.emplace(2, NumberFieldElement(K, {0, 1}));  // golden ratio, within 2 sqrt 2
  CHECK_NOTHROW(validate_newform(g));
  g.ap.insert_or_assign(2, NumberFieldElement(K, {1, 1}));  // 2.618 < 2.83 but conjugate 0.38, fine
  CHECK_NOTHROW(validate_newform(g));
  g.ap.insert_or_assign(2, NumberFieldElement(K, {2, 1}));  // 3.618 > 2.83
  CHECK_THROWS_AS(validate_newform(g), Error);
}

TEST_CASE("download, paginate, convert basis and cache") {
  MockServer mock;
  auto cache = scratch_dir("dl");
  NewformStore store(mock.config(cache));
  auto forms = store.fetch_newforms(11);
  REQUIRE(forms.size() == 2);
  CHECK(forms[0].label == "11.2.a.a");
  CHECK(forms[0].a(2).coords()[0] == -2);
  CHECK(forms[0].a(3).coords()[0] == -1);
  CHECK(forms[0].a(5).coords()[0] == 1);
  CHECK(forms[0].a(7).coords()[0] == -2);
  CHECK(forms[1].dim == 2);
  CHECK(forms[1].a(3).coords() == std::vector<Rat>{0, 1});
  CHECK(forms[1].a(11).coords() == std::vector<Rat>{1, 0});
  CHECK(mock.search_calls == 2);
  int before = store.network_requests();
  CHECK(before == 3);
  REQUIRE(fs::exists(store.cache_file(11)));

  // cache hit needs no network at all
  auto again = store.fetch_newforms(11);
  CHECK(store.network_requests() == before);
  auto cfg = mock.config(cache);
  cfg.offline = true;
  NewformStore offline(cfg);
  auto cached = offline.fetch_newforms(11);
  CHECK(newforms_to_json(11, 40, cached, "lmfdb") == slurp(store.cache_file(11)));
  CHECK(offline.network_requests() == 0);
  fs::remove_all(cache);
}

TEST_CASE("curves by label") {
  MockServer mock;
  auto cache = scratch_dir("curve");
  NewformStore store(mock.config(cache));
  auto c = store.fetch_curve("11.a1");
  CHECK(c.conductor == 11);
  CHECK(c.minimal_discriminant.value() == -161051);
  CHECK(c.isogeny_class() == "11.a");
  CHECK_THROWS_AS(store.fetch_curve("11.z9"), Error);
  try {
    store.fetch_curve("11.z9");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NotFound);
  }
  CHECK_THROWS_AS(store.fetch_curve("not a label"), Error);
  CHECK(valid_curve_label("14560.k1"));
  CHECK(valid_curve_label("14560.k"));
  CHECK_FALSE(valid_curve_label("14560"));
  CHECK_FALSE(valid_curve_label("0.a1"));
  fs::remove_all(cache);
}

TEST_CASE("retries, backoff and failure") {
  MockServer mock;
  auto cache = scratch_dir("retry");
  auto cfg = mock.config(cache);
  cfg.newforms_path = "/flaky/?level={level}";
  NewformStore store(cfg);
  auto forms = store.fetch_newforms(11);
  CHECK(forms.size() == 1);
  CHECK(mock.flaky_calls == 3);
  CHECK(store.network_requests() == 3);

  cfg.newforms_path = "/down/?level={level}";
  cfg.cache_dir = scratch_dir("down");
  NewformStore down(cfg);
  try {
    down.fetch_newforms(11);
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::IO);
  }
  CHECK(down.network_requests() == cfg.max_attempts);

  cfg.newforms_path = "/nowhere/?level={level}";
  NewformStore missing(cfg);
  try {
    missing.fetch_newforms(11);
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NotFound);
  }

  cfg.newforms_path = "/garbage/?level={level}";
  NewformStore garbage(cfg);
  try {
    garbage.fetch_newforms(11);
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Data);
    CHECK(std::string(e.what()).find("field_poly") != std::string::npos);
  }
  fs::remove_all(cache);
  fs::remove_all(cfg.cache_dir);
}

TEST_CASE("requests are spaced") {
  MockServer mock;
  auto cache = scratch_dir("space");
  auto cfg = mock.config(cache);
  cfg.min_spacing = std::chrono::milliseconds(80);
  NewformStore store(cfg);
  store.fetch_newforms(11);
  REQUIRE(mock.stamps.size() == 3);
  for (size_t i = 1; i < mock.stamps.size(); ++i)
    CHECK(mock.stamps[i] - mock.stamps[i - 1] >= std::chrono::milliseconds(75));
  fs::remove_all(cache);
}

TEST_CASE("offline without data") {
  StoreConfig cfg;
  cfg.cache_dir = scratch_dir("cold");
  cfg.offline = true;
  NewformStore store(cfg);
  try {
    store.fetch_newforms(37);
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::IO);
  }
  CHECK(store.network_requests() == 0);
  CHECK_THROWS_AS(store.fetch_newforms(0), Error);
  fs::remove_all(cfg.cache_dir);
}

TEST_CASE("shipped level 14560 and its curves") {
  StoreConfig cfg;
  cfg.cache_dir = scratch_dir("fx");
  cfg.offline = true;
  cfg.fixture_dirs = {default_fixture_dir()};
  NewformStore store(cfg);
  REQUIRE(store.available_offline(14560));
  auto forms = store.fetch_newforms(14560);
  std::set<std::string> rational;
  for (const auto& f : forms)
    if (f.rational()) rational.insert(f.orbit());
  for (const char* o : {"j", "k", "q", "r", "s"}) CHECK(rational.count(o));

  std::map<std::string, FactoredInteger> want{
      {"14560.k1", FactoredInteger::of(Int(64) * 5 * 49 * 13)},
      {"14560.q1", FactoredInteger::of(Int(512) * 25 * 343 * 169)},
      {"14560.s1", FactoredInteger::of(Int(64) * 5 * 2401 * 13)},
      {"14560.r1", FactoredInteger::of(Int(64) * 125 * 2401 * 2197)},
      {"14560.j3", FactoredInteger::of(Int(64) * 25 * 117649 * 28561)}};
  for (const auto& [label, disc] : want) {
    auto c = store.fetch_curve(label);
    CHECK(c.minimal_discriminant == disc);
    CHECK(c.conductor == 14560);
    REQUIRE(c.ainvs);
    CHECK(weierstrass_discriminant(*c.ainvs) == disc.value());
    // the curve's traces are the eigenvalues of the matching form
    const Newform* f = nullptr;
    for (const auto& g : forms)
      if (g.label == "14560.2.a." + c.isogeny_class().substr(6)) f = &g;
    REQUIRE(f);
    for (long l : primes_upto(100))
      if (14560 % l != 0) CHECK(count_points(*c.ainvs, l) == f->a(l).coords()[0]);
  }
  fs::remove_all(cfg.cache_dir);
}
