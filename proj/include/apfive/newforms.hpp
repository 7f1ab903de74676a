#pragma once

#include <array>
#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "apfive/numfield.hpp"

namespace apfive {

struct Newform {
  std::string label;
  long level = 0;
  int dim = 0;
  FieldPtr field;
  std::map<long, NumberFieldElement> ap;  // prime -> a_p(f)
  long prime_bound = 0;

  const NumberFieldElement& a(long ell) const;
  bool rational() const { return dim == 1; }
  std::string orbit() const;  // "k" for 14560.2.a.k
};

struct CurveClassData {
  std::string label;
  FactoredInteger minimal_discriminant;
  Int conductor;
  std::optional<std::array<Int, 5>> ainvs;

  std::string isogeny_class() const;  // "14560.k"
};

// checks dimension, Ramanujan bound per embedding and a_q in {0, +-1} at primes dividing the level
void validate_newform(const Newform& f);

std::string newforms_to_json(long level, long prime_bound, const std::vector<Newform>& forms,
                             const std::string& source);
std::vector<Newform> newforms_from_json(const std::string& text, long expect_level);
std::vector<CurveClassData> curves_from_json(const std::string& text);
std::string curves_to_json(const std::vector<CurveClassData>& curves);

struct StoreConfig {
  std::filesystem::path cache_dir = ".apfive-cache";
  std::vector<std::filesystem::path> fixture_dirs;
  bool offline = false;
  std::string base_url = "https://www.lmfdb.org";
  std::string newforms_path =
      "/api/mf_newforms/?level={level}&weight=2&char_order=1&_format=json"
      "&_fields=label,dim,field_poly,hecke_orbit_code,traces";
  std::string eigen_path =
      "/api/mf_hecke_nf/?hecke_orbit_code={code}&_format=json"
      "&_fields=ap,maxp,hecke_ring_numerators,hecke_ring_denominators,field_poly";
  std::string curve_path = "/api/ec_curvedata/?lmfdb_label={label}&_format=json&_fields=lmfdb_label,ainvs,conductor";
  long prime_bound = 100;
  std::chrono::milliseconds min_spacing{500};
  std::chrono::milliseconds backoff{1000};
  int max_attempts = 4;
  int timeout_seconds = 30;
};

// default fixture directory shipped with the sources, overridable by APFIVE_FIXTURE_DIR
std::filesystem::path default_fixture_dir();
// APFIVE_OFFLINE set to anything but "" / "0"
bool offline_from_env();

class NewformStore {
 public:
  explicit NewformStore(StoreConfig cfg);

  std::vector<Newform> fetch_newforms(long level);
  CurveClassData fetch_curve(const std::string& label);
  // every locally known curve in an isogeny class such as "14560.k"; falls back to fetching "<class>1"
  std::vector<CurveClassData> curves_in_class(const std::string& cls);

  std::filesystem::path cache_file(long level) const;
  bool available_offline(long level) const;
  const StoreConfig& config() const { return cfg_; }
  int network_requests() const { return requests_; }

 private:
  std::string http_get(const std::string& path);
  std::vector<Newform> download_newforms(long level);
  std::optional<std::string> read_local(long level) const;
  std::optional<CurveClassData> local_curve(const std::string& label) const;

  StoreConfig cfg_;
  std::mutex net_mu_;
  std::chrono::steady_clock::time_point last_request_{};
  int requests_ = 0;
};

bool valid_curve_label(const std::string& label);

}  // namespace apfive
