#include "apfive/newforms.hpp"

#include <httplib.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <json.hpp>
#include <regex>
#include <set>
#include <sstream>
#include <thread>

#include "apfive/error.hpp"
#include "apfive/frey.hpp"

#ifndef APFIVE_FIXTURE_DIR
#define APFIVE_FIXTURE_DIR "data/fixtures"
#endif

namespace apfive {

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr const char* kFormat = "apfive-newforms";
constexpr const char* kCurveFormat = "apfive-curves";
constexpr int kVersion = 1;

[[noreturn]] void bad(const std::string& where, const std::string& what) {
  fail(ErrorKind::Data, "malformed data: field '" + where + "': " + what);
}

const json& need(const json& j, const std::string& key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) bad(where + "." + key, "missing");
  return j.at(key);
}

Int to_int(const json& j, const std::string& where) {
  try {
    if (j.is_number_integer()) return Int(std::to_string(j.get<long long>()));
    if (j.is_string()) return Int(j.get<std::string>());
  } catch (const std::exception&) {
  }
  bad(where, "expected an integer");
}

Rat to_rat(const json& j, const std::string& where) {
  try {
    if (j.is_number_integer()) return Rat(Int(std::to_string(j.get<long long>())));
    if (j.is_string()) {
      Rat q(j.get<std::string>());
      q.canonicalize();
      return q;
    }
  } catch (const std::exception&) {
  }
  bad(where, "expected a rational");
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) fail(ErrorKind::IO, "cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const fs::path& p, const std::string& text) {
  std::error_code ec;
  fs::create_directories(p.parent_path(), ec);
  if (ec) fail(ErrorKind::IO, "cannot create " + p.parent_path().string() + ": " + ec.message());
  fs::path tmp = p;
  tmp += ".tmp." + std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::IO, "cannot write " + tmp.string());
    out << text;
    if (!out) fail(ErrorKind::IO, "write failed for " + tmp.string());
  }
  fs::rename(tmp, p, ec);
  if (ec) fail(ErrorKind::IO, "cannot move " + tmp.string() + " into place: " + ec.message());
}

std::string replace_all(std::string s, const std::string& key, const std::string& val) {
  for (size_t pos; (pos = s.find(key)) != std::string::npos;) s.replace(pos, key.size(), val);
  return s;
}

// orbit suffix ordering: shorter first, then lexicographic (a < ... < z < ba < bb ...)
bool label_less(const Newform& a, const Newform& b) {
  auto oa = a.orbit(), ob = b.orbit();
  if (oa.size() != ob.size()) return oa.size() < ob.size();
  return oa < ob;
}

std::string rat_str(const Rat& q) { return q.get_str(); }

}  // namespace

// ---------------------------------------------------------------- values

const NumberFieldElement& Newform::a(long ell) const {
  auto it = ap.find(ell);
  if (it == ap.end())
    fail(ErrorKind::Data, "newform " + label + " has no eigenvalue at " + std::to_string(ell) +
                              " (stored up to " + std::to_string(prime_bound) + ")");
  return it->second;
}

std::string Newform::orbit() const {
  auto pos = label.rfind('.');
  return pos == std::string::npos ? label : label.substr(pos + 1);
}

std::string CurveClassData::isogeny_class() const {
  std::smatch m;
  static const std::regex re(R"(^(\d+\.[a-z]+)\d*$)");
  if (std::regex_match(label, m, re)) return m[1];
  return label;
}

bool valid_curve_label(const std::string& label) {
  static const std::regex re(R"(^[1-9]\d*\.[a-z]+\d*$)");
  return std::regex_match(label, re);
}

void validate_newform(const Newform& f) {
  if (f.dim != f.field->degree())
    fail(ErrorKind::Data, f.label + ": dim " + std::to_string(f.dim) + " does not match field degree");
  for (const auto& [p, a] : f.ap) {
    if (f.level % p == 0) {
      bool ok = a.is_rational() && (a.coords()[0] == 0 || abs(a.coords()[0]) == 1);
      if (!ok) fail(ErrorKind::Data, f.label + ": a_" + std::to_string(p) + " must be 0 or +-1 at a bad prime");
      continue;
    }
    long double bound = 2.0L * std::sqrt(static_cast<long double>(p)) * (1 + 1e-6L);
    for (const auto& z : a.embeddings())
      if (std::abs(z) > bound)
        fail(ErrorKind::Data, f.label + ": a_" + std::to_string(p) + " violates the Ramanujan bound");
  }
}

// ---------------------------------------------------------------- serialization

std::string newforms_to_json(long level, long prime_bound, const std::vector<Newform>& forms,
                             const std::string& source) {
  json arr = json::array();
  for (const auto& f : forms) {
    json fp = json::array();
    for (const auto& c : f.field->poly()) fp.push_back(c.get_str());
    json ev = json::array();
    for (const auto& [p, a] : f.ap) {
      json co = json::array();
      for (const auto& c : a.coords()) co.push_back(rat_str(c));
      ev.push_back({{"p", p}, {"coords", co}});
    }
    arr.push_back({{"label", f.label}, {"dim", f.dim}, {"field_poly", fp}, {"eigenvalues", ev}});
  }
  json doc = {{"format", kFormat}, {"version", kVersion}, {"level", level},
              {"weight", 2},       {"prime_bound", prime_bound}, {"source", source},
              {"newforms", arr}};
  return doc.dump(2) + "\n";
}

std::vector<Newform> newforms_from_json(const std::string& text, long expect_level) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::Data, std::string("malformed data: not JSON: ") + e.what());
  }
  if (need(doc, "format", "$") != kFormat) bad("$.format", "unexpected format tag");
  if (need(doc, "version", "$") != kVersion) bad("$.version", "unsupported version");
  long level = to_int(need(doc, "level", "$"), "$.level").get_si();
  if (expect_level && level != expect_level)
    bad("$.level", "file is for level " + std::to_string(level) + ", expected " + std::to_string(expect_level));
  if (need(doc, "weight", "$") != 2) bad("$.weight", "only weight 2 is supported");
  long bound = to_int(need(doc, "prime_bound", "$"), "$.prime_bound").get_si();
  const json& arr = need(doc, "newforms", "$");
  if (!arr.is_array()) bad("$.newforms", "expected an array");
  std::vector<Newform> out;
  for (size_t i = 0; i < arr.size(); ++i) {
    std::string w = "$.newforms[" + std::to_string(i) + "]";
    const json& j = arr[i];
    Newform f;
    f.level = level;
    f.prime_bound = bound;
    const json& lab = need(j, "label", w);
    if (!lab.is_string()) bad(w + ".label", "expected a string");
    f.label = lab.get<std::string>();
    f.dim = int(to_int(need(j, "dim", w), w + ".dim").get_si());
    const json& fp = need(j, "field_poly", w);
    if (!fp.is_array() || int(fp.size()) != f.dim + 1) bad(w + ".field_poly", "expected dim+1 coefficients");
    std::vector<Int> poly;
    for (size_t k = 0; k < fp.size(); ++k) poly.push_back(to_int(fp[k], w + ".field_poly"));
    try {
      f.field = NumberField::make(poly);
    } catch (const Error& e) {
      bad(w + ".field_poly", e.what());
    }
    const json& ev = need(j, "eigenvalues", w);
    if (!ev.is_array()) bad(w + ".eigenvalues", "expected an array");
    for (size_t k = 0; k < ev.size(); ++k) {
      std::string we = w + ".eigenvalues[" + std::to_string(k) + "]";
      long p = to_int(need(ev[k], "p", we), we + ".p").get_si();
      const json& co = need(ev[k], "coords", we);
      if (!co.is_array() || int(co.size()) != f.dim) bad(we + ".coords", "expected dim coordinates");
      std::vector<Rat> c;
      for (const auto& x : co) c.push_back(to_rat(x, we + ".coords"));
      f.ap.emplace(p, NumberFieldElement(f.field, std::move(c)));
    }
    for (long p : primes_upto(bound))
      if (!f.ap.count(p)) bad(w + ".eigenvalues", "missing a_" + std::to_string(p));
    validate_newform(f);
    out.push_back(std::move(f));
  }
  return out;
}

std::vector<CurveClassData> curves_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::Data, std::string("malformed data: not JSON: ") + e.what());
  }
  if (need(doc, "format", "$") != kCurveFormat) bad("$.format", "unexpected format tag");
  const json& arr = need(doc, "curves", "$");
  std::vector<CurveClassData> out;
  for (size_t i = 0; i < arr.size(); ++i) {
    std::string w = "$.curves[" + std::to_string(i) + "]";
    const json& j = arr[i];
    CurveClassData c;
    c.label = need(j, "label", w).get<std::string>();
    c.conductor = to_int(need(j, "conductor", w), w + ".conductor");
    const json& md = need(j, "minimal_discriminant", w);
    FactoredInteger f;
    Int value = to_int(need(md, "sign", w + ".minimal_discriminant"), w + ".minimal_discriminant.sign");
    for (const auto& pe : need(md, "factors", w + ".minimal_discriminant")) {
      if (!pe.is_array() || pe.size() != 2) bad(w + ".minimal_discriminant.factors", "expected [prime, exponent]");
      Int q = to_int(pe[0], w + ".minimal_discriminant.factors");
      unsigned long e = to_int(pe[1], w + ".minimal_discriminant.factors").get_ui();
      Int t;
      mpz_pow_ui(t.get_mpz_t(), q.get_mpz_t(), e);
      value *= t;
    }
    c.minimal_discriminant = FactoredInteger::of(value);
    if (j.contains("ainvs")) {
      const json& a = j.at("ainvs");
      if (!a.is_array() || a.size() != 5) bad(w + ".ainvs", "expected five coefficients");
      std::array<Int, 5> ai;
      for (int k = 0; k < 5; ++k) ai[k] = to_int(a[k], w + ".ainvs");
      c.ainvs = ai;
    }
    out.push_back(std::move(c));
  }
  return out;
}

std::string curves_to_json(const std::vector<CurveClassData>& curves) {
  json arr = json::array();
  for (const auto& c : curves) {
    json fac = json::array();
    for (const auto& [q, e] : c.minimal_discriminant.factors()) fac.push_back({q.get_str(), e});
    json o = {{"label", c.label},
              {"conductor", c.conductor.get_str()},
              {"minimal_discriminant", {{"sign", c.minimal_discriminant.sign()}, {"factors", fac}}}};
    if (c.ainvs) {
      json a = json::array();
      for (const auto& x : *c.ainvs) a.push_back(x.get_str());
      o["ainvs"] = a;
    }
    arr.push_back(o);
  }
  json doc = {{"format", kCurveFormat}, {"version", kVersion}, {"curves", arr}};
  return doc.dump(2) + "\n";
}

// ---------------------------------------------------------------- store

fs::path default_fixture_dir() {
  if (const char* e = std::getenv("APFIVE_FIXTURE_DIR"); e && *e) return e;
  return APFIVE_FIXTURE_DIR;
}

bool offline_from_env() {
  const char* e = std::getenv("APFIVE_OFFLINE");
  return e && *e && std::string(e) != "0";
}

NewformStore::NewformStore(StoreConfig cfg) : cfg_(std::move(cfg)) {}

fs::path NewformStore::cache_file(long level) const {
  return cfg_.cache_dir / ("level_" + std::to_string(level) + ".json");
}

std::optional<std::string> NewformStore::read_local(long level) const {
  std::string name = "level_" + std::to_string(level) + ".json";
  if (fs::exists(cache_file(level))) return read_file(cache_file(level));
  for (const auto& dir : cfg_.fixture_dirs) {
    for (const fs::path& p : {dir / name, dir / "newforms" / name})
      if (fs::exists(p)) return read_file(p);
  }
  return std::nullopt;
}

bool NewformStore::available_offline(long level) const { return read_local(level).has_value(); }

std::vector<Newform> NewformStore::fetch_newforms(long level) {
  if (level < 1) fail(ErrorKind::Argument, "level must be >= 1");
  if (auto text = read_local(level)) {
    auto forms = newforms_from_json(*text, level);
    if (!forms.empty() && forms.front().prime_bound < cfg_.prime_bound)
      fail(ErrorKind::Data, "stored eigenvalues for level " + std::to_string(level) + " stop below " +
                                std::to_string(cfg_.prime_bound));
    // fixture hits are copied so the cache alone reproduces the run; a read-only cache is not fatal
    if (!fs::exists(cache_file(level))) {
      try {
        write_file_atomic(cache_file(level), *text);
      } catch (const Error&) {
      }
    }
    return forms;
  }
  if (cfg_.offline)
    fail(ErrorKind::IO, "level " + std::to_string(level) + " is not cached and offline mode is on");
  auto forms = download_newforms(level);
  write_file_atomic(cache_file(level), newforms_to_json(level, cfg_.prime_bound, forms, "lmfdb"));
  return forms;
}

std::string NewformStore::http_get(const std::string& path) {
  std::lock_guard<std::mutex> lock(net_mu_);  // at most one request in flight
  auto backoff = cfg_.backoff;
  std::string last_err;
  for (int attempt = 0; attempt < cfg_.max_attempts; ++attempt) {
    auto now = std::chrono::steady_clock::now();
    if (requests_ > 0 && now - last_request_ < cfg_.min_spacing)
      std::this_thread::sleep_for(cfg_.min_spacing - (now - last_request_));
    last_request_ = std::chrono::steady_clock::now();
    ++requests_;
    httplib::Client cli(cfg_.base_url);
    cli.set_connection_timeout(cfg_.timeout_seconds);
    cli.set_read_timeout(cfg_.timeout_seconds);
    cli.set_follow_location(true);
    auto res = cli.Get(path);
    if (res && res->status == 200) return res->body;
    if (res && res->status == 404) fail(ErrorKind::NotFound, "not found: " + path);
    last_err = res ? "HTTP " + std::to_string(res->status) : httplib::to_string(res.error());
    if (attempt + 1 < cfg_.max_attempts) {
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }
  }
  fail(ErrorKind::IO, "request failed after " + std::to_string(cfg_.max_attempts) + " attempts (" + last_err +
                          "): " + cfg_.base_url + path);
}

std::vector<Newform> NewformStore::download_newforms(long level) {
  auto parse = [](const std::string& body, const std::string& what) {
    try {
      return json::parse(body);
    } catch (const json::parse_error& e) {
      fail(ErrorKind::Data, "malformed data: " + what + " response is not JSON: " + e.what());
    }
  };
  std::vector<json> records;
  std::string path = replace_all(cfg_.newforms_path, "{level}", std::to_string(level));
  while (true) {
    json page = parse(http_get(path), "newform search");
    const json& data = need(page, "data", "response");
    if (!data.is_array()) bad("response.data", "expected an array");
    for (const auto& r : data) records.push_back(r);
    if (page.contains("next") && page["next"].is_string() && !page["next"].get<std::string>().empty()) {
      std::string next = page["next"];
      auto pos = next.find("/api/");
      path = pos == std::string::npos ? next : next.substr(pos);
    } else {
      break;
    }
  }
  auto primes = primes_upto(cfg_.prime_bound);
  std::vector<Newform> out;
  for (size_t i = 0; i < records.size(); ++i) {
    const json& r = records[i];
    std::string w = "data[" + std::to_string(i) + "]";
    Newform f;
    f.level = level;
    f.prime_bound = cfg_.prime_bound;
    f.label = need(r, "label", w).get<std::string>();
    f.dim = int(to_int(need(r, "dim", w), w + ".dim").get_si());
    if (f.dim == 1) {
      f.field = NumberField::make_unchecked({Int(0), Int(1)});
      const json& tr = need(r, "traces", w);
      if (!tr.is_array() || long(tr.size()) < cfg_.prime_bound) bad(w + ".traces", "too short");
      for (long p : primes) f.ap.emplace(p, NumberFieldElement(f.field, {to_rat(tr[p - 1], w + ".traces")}));
    } else {
      std::vector<Int> poly;
      for (const auto& c : need(r, "field_poly", w)) poly.push_back(to_int(c, w + ".field_poly"));
      try {
        f.field = NumberField::make(poly);
      } catch (const Error& e) {
        bad(w + ".field_poly", e.what());
      }
      std::string code = to_int(need(r, "hecke_orbit_code", w), w + ".hecke_orbit_code").get_str();
      json ep = parse(http_get(replace_all(cfg_.eigen_path, "{code}", code)), "eigenvalue");
      const json& ed = need(ep, "data", "eigenvalue response");
      if (!ed.is_array() || ed.empty()) bad("eigenvalue response.data", "no record for " + f.label);
      const json& e = ed[0];
      const json& nums = need(e, "hecke_ring_numerators", "eigenvalues");
      const json& dens = need(e, "hecke_ring_denominators", "eigenvalues");
      const json& ap = need(e, "ap", "eigenvalues");
      if (!ap.is_array() || ap.size() < primes.size()) bad("eigenvalues.ap", "fewer entries than primes up to bound");
      // Hecke ring basis beta_i = (sum_j num[i][j] t^j) / den[i]; convert to the power basis
      std::vector<std::vector<Rat>> basis;
      for (size_t k = 0; k < nums.size(); ++k) {
        std::vector<Rat> b(f.dim, Rat(0));
        Int den = to_int(dens.at(k), "eigenvalues.hecke_ring_denominators");
        for (size_t j = 0; j < nums[k].size() && int(j) < f.dim; ++j)
          b[j] = Rat(to_int(nums[k][j], "eigenvalues.hecke_ring_numerators"), den);
        for (auto& x : b) x.canonicalize();
        basis.push_back(b);
      }
      if (int(basis.size()) != f.dim) bad("eigenvalues.hecke_ring_numerators", "expected dim basis vectors");
      for (size_t k = 0; k < primes.size(); ++k) {
        const json& v = ap[k];
        if (!v.is_array() || int(v.size()) != f.dim) bad("eigenvalues.ap", "expected dim coordinates");
        std::vector<Rat> c(f.dim, Rat(0));
        for (int i = 0; i < f.dim; ++i) {
          Rat ci = to_rat(v[i], "eigenvalues.ap");
          for (int j = 0; j < f.dim; ++j) c[j] += ci * basis[i][j];
        }
        f.ap.emplace(primes[k], NumberFieldElement(f.field, std::move(c)));
      }
    }
    validate_newform(f);
    out.push_back(std::move(f));
  }
  std::sort(out.begin(), out.end(), label_less);
  return out;
}

std::optional<CurveClassData> NewformStore::local_curve(const std::string& label) const {
  std::vector<fs::path> files;
  files.push_back(cfg_.cache_dir / ("curve_" + label + ".json"));
  for (const auto& dir : cfg_.fixture_dirs) {
    files.push_back(dir / "curves.json");
    files.push_back(dir / "curves" / "curves.json");
  }
  for (const auto& p : files) {
    if (!fs::exists(p)) continue;
    for (auto& c : curves_from_json(read_file(p)))
      if (c.label == label) return c;
  }
  return std::nullopt;
}

std::vector<CurveClassData> NewformStore::curves_in_class(const std::string& cls) {
  std::vector<CurveClassData> out;
  std::set<std::string> seen;
  for (const auto& dir : cfg_.fixture_dirs)
    for (const auto& p : {dir / "curves.json", dir / "curves" / "curves.json"}) {
      if (!fs::exists(p)) continue;
      for (auto& c : curves_from_json(read_file(p)))
        if (c.isogeny_class() == cls && seen.insert(c.label).second) out.push_back(c);
    }
  if (out.empty()) out.push_back(fetch_curve(cls + "1"));
  return out;
}

CurveClassData NewformStore::fetch_curve(const std::string& label) {
  if (!valid_curve_label(label)) fail(ErrorKind::Argument, "malformed curve label '" + label + "'");
  if (auto c = local_curve(label)) return *c;
  if (cfg_.offline) fail(ErrorKind::NotFound, "curve " + label + " is not in the local data and offline mode is on");
  json page;
  try {
    page = json::parse(http_get(replace_all(cfg_.curve_path, "{label}", label)));
  } catch (const json::parse_error& e) {
    fail(ErrorKind::Data, std::string("malformed data: curve response is not JSON: ") + e.what());
  }
  const json& data = need(page, "data", "response");
  if (!data.is_array() || data.empty()) fail(ErrorKind::NotFound, "unknown curve label " + label);
  const json& r = data[0];
  CurveClassData c;
  c.label = label;
  c.conductor = to_int(need(r, "conductor", "data[0]"), "data[0].conductor");
  const json& a = need(r, "ainvs", "data[0]");
  if (!a.is_array() || a.size() != 5) bad("data[0].ainvs", "expected five coefficients");
  std::array<Int, 5> ai;
  for (int k = 0; k < 5; ++k) ai[k] = to_int(a[k], "data[0].ainvs");
  c.ainvs = ai;
  // stored models are global minimal models, so this is the minimal discriminant
  c.minimal_discriminant = FactoredInteger::of(weierstrass_discriminant(ai));
  write_file_atomic(cfg_.cache_dir / ("curve_" + label + ".json"), curves_to_json({c}));
  return c;
}

}  // namespace apfive
