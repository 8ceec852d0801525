#include "phonopulse/trace_io.hpp"

#include <array>
#include <cmath>
#include <cstring>
#include <fstream>

#include "phonopulse/errors.hpp"
#include "phonopulse/kvdoc.hpp"

namespace phonopulse {

namespace {

constexpr std::array<char, 8> kMagic = {'P', 'H', 'P', 'U', 'L', 'S', 'E', '\0'};
constexpr std::uint32_t kVersion = 1;
constexpr std::size_t kHeaderBytes = 56;

template <typename T>
void put(std::string& buf, T value) {
  char raw[sizeof(T)];
  std::memcpy(raw, &value, sizeof(T));
  buf.append(raw, sizeof(T));
}

template <typename T>
T take(const char* data) {
  T value;
  std::memcpy(&value, data, sizeof(T));
  return value;
}

KvDoc sidecar_doc(const TraceSet& set) {
  KvDoc doc;
  doc.set_int("trace", "n_reps", static_cast<std::int64_t>(set.n_reps()));
  doc.set_int("trace", "n_samples", static_cast<std::int64_t>(set.n_samples()));
  doc.set_double("trace", "dt_s", set.dt());
  doc.set_double("trace", "sample_rate_hz", 1.0 / set.dt());
  if (set.temperature_k())
    doc.set_double("trace", "temperature_k", *set.temperature_k());
  char hash_hex[32];
  std::snprintf(hash_hex, sizeof(hash_hex), "0x%016llx",
                static_cast<unsigned long long>(set.provenance().config_hash));
  doc.set("provenance", "config_hash", hash_hex);
  doc.set_int("provenance", "base_seed",
              static_cast<std::int64_t>(set.provenance().base_seed));
  if (set.truth()) {
    const SynthTruth& t = *set.truth();
    doc.set_double("truth", "n0_phonons", t.n0);
    doc.set_double("truth", "n_floor_phonons", t.n_floor);
    doc.set_double("truth", "alpha_v_v2_per_phonon", t.alpha_v);
    doc.set_double("truth", "sigma_imp_v", t.sigma_imp);
    doc.set_double("truth", "bath_n_th", t.bath.n_th);
    doc.set_double("truth", "bath_gamma_m_hz", t.bath.gamma_m);
    doc.set_double("truth", "bath_n_p", t.bath.n_p);
    doc.set_double("truth", "bath_gamma_p_hz", t.bath.gamma_p);
    doc.set("truth", "rate_convention",
            t.convention == RateConvention::angular ? "angular" : "ordinary");
  }
  return doc;
}

}  // namespace

void write_traceset(const TraceSet& set, const std::filesystem::path& path) {
  std::string buf;
  buf.reserve(kHeaderBytes + set.raw().size() * sizeof(float));
  buf.append(kMagic.data(), kMagic.size());
  put<std::uint32_t>(buf, kVersion);
  put<std::uint32_t>(buf, 0u);
  put<std::uint64_t>(buf, set.n_reps());
  put<std::uint64_t>(buf, set.n_samples());
  put<double>(buf, set.dt());
  put<std::uint64_t>(buf, set.provenance().base_seed);
  put<std::uint64_t>(buf, set.provenance().config_hash);
  buf.append(reinterpret_cast<const char*>(set.raw().data()),
             set.raw().size() * sizeof(float));
  atomic_write_text(path, buf);

  std::filesystem::path meta = path;
  meta += ".meta";
  sidecar_doc(set).save(meta, {"trace sidecar metadata"});
}

TraceSet read_traceset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());

  std::array<char, kHeaderBytes> header;
  in.read(header.data(), header.size());
  if (in.gcount() != static_cast<std::streamsize>(kHeaderBytes))
    throw FormatError("truncated trace header in " + path.string(), "header");
  if (std::memcmp(header.data(), kMagic.data(), kMagic.size()) != 0)
    throw FormatError("bad magic in " + path.string(), "magic");
  const auto version = take<std::uint32_t>(header.data() + 8);
  if (version != kVersion)
    throw FormatError("unsupported trace version " + std::to_string(version) +
                          " in " + path.string(),
                      "version");
  const auto n_reps = take<std::uint64_t>(header.data() + 16);
  const auto n_samples = take<std::uint64_t>(header.data() + 24);
  const double dt = take<double>(header.data() + 32);
  const auto base_seed = take<std::uint64_t>(header.data() + 40);
  const auto config_hash = take<std::uint64_t>(header.data() + 48);
  if (n_reps == 0) throw FormatError("n_reps is zero", "n_reps");
  if (n_samples == 0) throw FormatError("n_samples is zero", "n_samples");
  if (!(dt > 0.0) || !std::isfinite(dt))
    throw FormatError("dt must be a positive finite float", "dt");

  if (n_reps * n_samples > (1ull << 34))
    throw FormatError("implausible trace dimensions", "n_samples");

  TraceSet set(dt, n_reps, n_samples);
  set.provenance().base_seed = base_seed;
  set.provenance().config_hash = config_hash;
  const std::size_t payload = n_reps * n_samples * sizeof(float);
  in.read(reinterpret_cast<char*>(set.mutable_row(0).data()),
          static_cast<std::streamsize>(payload));
  if (in.gcount() != static_cast<std::streamsize>(payload))
    throw FormatError("trace payload shorter than header promises (" +
                          std::to_string(in.gcount()) + " of " +
                          std::to_string(payload) + " bytes)",
                      "samples");

  // Optional sidecar: restores the sweep temperature and synthetic truth.
  std::filesystem::path meta = path;
  meta += ".meta";
  if (std::filesystem::exists(meta)) {
    const KvDoc doc = KvDoc::load(meta);
    if (doc.has("trace", "temperature_k"))
      set.temperature_k() = doc.get_double("trace", "temperature_k");
    if (doc.has_section("truth")) {
      SynthTruth t;
      t.n0 = doc.get_double("truth", "n0_phonons");
      t.n_floor = doc.get_double("truth", "n_floor_phonons");
      t.alpha_v = doc.get_double("truth", "alpha_v_v2_per_phonon");
      t.sigma_imp = doc.get_double("truth", "sigma_imp_v");
      t.bath.n_th = doc.get_double("truth", "bath_n_th");
      t.bath.gamma_m = doc.get_double("truth", "bath_gamma_m_hz");
      t.bath.n_p = doc.get_double("truth", "bath_n_p");
      t.bath.gamma_p = doc.get_double("truth", "bath_gamma_p_hz");
      t.convention = doc.get("truth", "rate_convention") == "ordinary"
                         ? RateConvention::ordinary
                         : RateConvention::angular;
      set.truth() = t;
    }
  }
  return set;
}

}  // namespace phonopulse
