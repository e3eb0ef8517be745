#include "magconv/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <set>
#include <span>
#include <sstream>

#include "magconv/error.hpp"
#include "magconv/units.hpp"

namespace magconv {

namespace {

enum class Quantity { Frequency, Field, Length, Gyro };

struct UnitDef {
    std::string_view name;
    int exponent;      // power of ten to the base unit
    bool angular_rate; // rad/s: already angular
};

constexpr UnitDef frequency_units[] = {
    {"Hz", 0, false}, {"kHz", 3, false}, {"MHz", 6, false}, {"GHz", 9, false}, {"THz", 12, false}, {"rad/s", 0, true},
};
constexpr UnitDef field_units[] = {{"T", 0, false}, {"mT", -3, false}, {"uT", -6, false}};
constexpr UnitDef length_units[] = {{"m", 0, false}, {"mm", -3, false}, {"um", -6, false}, {"nm", -9, false}};
constexpr UnitDef gyro_units[] = {{"Hz/T", 0, false}, {"kHz/T", 3, false}, {"MHz/T", 6, false}, {"GHz/T", 9, false}};

std::span<const UnitDef> units_of(Quantity q)
{
    switch (q) {
    case Quantity::Frequency: return frequency_units;
    case Quantity::Field: return field_units;
    case Quantity::Length: return length_units;
    case Quantity::Gyro: return gyro_units;
    }
    return {};
}

std::string unit_list(Quantity q)
{
    std::string s;
    for (const UnitDef& u : units_of(q))
        s += (s.empty() ? "" : ", ") + std::string(u.name);
    return s;
}

// Accepted keys per section; "" holds the top level.
const std::map<std::string, std::set<std::string>, std::less<>>& schema()
{
    static const std::map<std::string, std::set<std::string>, std::less<>> s{
        {"", {"schema_version"}},
        {"microwave", {"omega", "kappa_ext", "gamma_int"}},
        {"magnon", {"omega_m", "gamma_m"}},
        {"optical", {"omega", "kappa_ext", "gamma_int", "wavelength", "fsr"}},
        {"coupling", {"g_ma", "g_mb", "g_mb_single", "pump_amplitude", "sideband_detuning", "process"}},
        {"geometry", {"mu0_HM", "thickness", "l1", "l2", "gyro_over_2pi", "wavevector"}},
        {"simulate", {"probe_start", "probe_stop", "probe_points", "probe_spacing"}},
        {"map2d",
         {"field_start", "field_stop", "field_points", "field_spacing", "freq_start", "freq_stop", "freq_points",
          "freq_spacing", "kind", "modes", "optical_mode", "mssw_scale", "bvmsw_scale", "bvmsw_power"}},
        {"fsrscan", {"mode", "fsr_start", "fsr_stop", "fsr_points", "fsr_spacing", "model"}},
        {"fit",
         {"kind", "input", "scale", "regime", "window_field_lo", "window_field_hi", "window_freq_lo",
          "window_freq_hi"}},
        {"optimize",
         {"target", "kappa_start", "kappa_stop", "kappa_points", "kappa_spacing", "gmb_start", "gmb_stop",
          "gmb_points", "gmb_spacing", "mode", "fsr_lo", "fsr_hi", "field_lo", "field_hi", "rounds"}},
        {"dispersion", {"family", "max_index", "field"}},
        {"report", {"eta", "eta_int"}},
    };
    return s;
}

constexpr int max_axis_points = 1'000'000;

struct Entry {
    std::string value;
    int line = 0;
};

struct Section {
    int line = 0;
    std::map<std::string, Entry, std::less<>> keys;
};

bool is_ident(std::string_view s)
{
    if (s.empty() || std::isdigit(static_cast<unsigned char>(s[0])))
        return false;
    return std::all_of(s.begin(), s.end(), [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; });
}

std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

[[noreturn]] void fail_at(ErrorCode code, int line, std::string_view what)
{
    fail(code, "line " + std::to_string(line) + ": " + std::string(what));
}

// Drops a trailing comment, leaving '#' inside a quoted string alone.
std::string_view strip_comment(std::string_view s, int line)
{
    bool quoted = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (quoted && s[i] == '\\') {
            ++i;
            continue;
        }
        if (s[i] == '"')
            quoted = !quoted;
        else if (s[i] == '#' && !quoted)
            return s.substr(0, i);
    }
    if (quoted)
        fail_at(ErrorCode::ConfigSyntax, line, "unterminated string");
    return s;
}

std::map<std::string, Section, std::less<>> tokenize(std::string_view text)
{
    std::map<std::string, Section, std::less<>> doc;
    doc[""].line = 0;
    std::string current;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t end = std::min(text.find('\n', pos), text.size());
        ++line_no;
        const std::string_view line = trim(strip_comment(text.substr(pos, end - pos), line_no));
        pos = end + 1;
        if (line.empty())
            continue;

        if (line.front() == '[') {
            if (line.back() != ']')
                fail_at(ErrorCode::ConfigSyntax, line_no, "malformed section header");
            const std::string_view name = trim(line.substr(1, line.size() - 2));
            if (!is_ident(name))
                fail_at(ErrorCode::ConfigSyntax, line_no, "malformed section name '" + std::string(name) + "'");
            if (!schema().contains(name))
                fail_at(ErrorCode::UnknownKey, line_no, "unknown section [" + std::string(name) + "]");
            if (doc.contains(name))
                fail_at(ErrorCode::ConfigSyntax, line_no, "duplicate section [" + std::string(name) + "]");
            current = std::string(name);
            doc[current].line = line_no;
            continue;
        }

        const std::size_t eq = line.find('=');
        if (eq == std::string_view::npos)
            fail_at(ErrorCode::ConfigSyntax, line_no, "expected 'key = value'");
        const std::string_view key = trim(line.substr(0, eq));
        const std::string_view value = trim(line.substr(eq + 1));
        const std::string qualified = current.empty() ? std::string(key) : current + "." + std::string(key);
        if (!is_ident(key))
            fail_at(ErrorCode::ConfigSyntax, line_no, "malformed key '" + std::string(key) + "'");
        if (!schema().find(current)->second.contains(std::string(key)))
            fail_at(ErrorCode::UnknownKey, line_no, "unknown key '" + qualified + "'");
        if (value.empty())
            fail_at(ErrorCode::ConfigSyntax, line_no, "key '" + qualified + "' has no value");
        Section& sec = doc[current];
        if (sec.keys.contains(key))
            fail_at(ErrorCode::ConfigSyntax, line_no, "duplicate key '" + qualified + "'");
        sec.keys.emplace(std::string(key), Entry{std::string(value), line_no});
    }
    return doc;
}

// Typed access to one section.
class Reader {
public:
    Reader(std::string name, const Section& sec) : name_(std::move(name)), sec_(sec) {}

    bool has(std::string_view key) const { return sec_.keys.contains(key); }

    // rad/s for frequencies; T, m and Hz/T otherwise.
    double quantity(std::string_view key, Quantity q) const { return quantity_at(entry(key), key, q); }
    std::optional<double> opt_quantity(std::string_view key, Quantity q) const
    {
        return has(key) ? std::optional(quantity(key, q)) : std::nullopt;
    }
    // Frequencies kept in Hz (axes, FSR).
    double hz(std::string_view key) const { return quantity_at(entry(key), key, Quantity::Frequency, false); }
    std::optional<double> opt_hz(std::string_view key) const
    {
        return has(key) ? std::optional(hz(key)) : std::nullopt;
    }

    double real(std::string_view key) const
    {
        const Entry& e = entry(key);
        const auto [v, rest] = split_number(e, key);
        if (!rest.empty())
            fail_at(ErrorCode::ConfigSyntax, e.line, "key '" + qualified(key) + "' is dimensionless and takes no unit");
        return v;
    }

    int integer(std::string_view key) const
    {
        const Entry& e = entry(key);
        int v = 0;
        const char* first = e.value.data();
        const char* last = first + e.value.size();
        const auto [p, ec] = std::from_chars(first, last, v);
        if (ec != std::errc() || p != last)
            fail_at(ErrorCode::ConfigSyntax, e.line, "key '" + qualified(key) + "' expects an integer");
        return v;
    }

    std::string word(std::string_view key) const
    {
        const Entry& e = entry(key);
        if (!std::all_of(e.value.begin(), e.value.end(),
                         [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_'; }))
            fail_at(ErrorCode::ConfigSyntax, e.line, "key '" + qualified(key) + "' expects a bare word");
        return e.value;
    }

    template <class T>
    T choice(std::string_view key, std::initializer_list<std::pair<std::string_view, T>> options) const
    {
        const std::string w = word(key);
        std::string names;
        for (const auto& [name, value] : options) {
            if (w == name)
                return value;
            names += (names.empty() ? "" : ", ") + std::string(name);
        }
        fail_at(ErrorCode::RangeViolation, line(key),
                "key '" + qualified(key) + "' must be one of " + names + " (got '" + w + "')");
    }

    std::string string(std::string_view key) const
    {
        const Entry& e = entry(key);
        const std::string& v = e.value;
        if (v.size() < 2 || v.front() != '"' || v.back() != '"')
            fail_at(ErrorCode::ConfigSyntax, e.line, "key '" + qualified(key) + "' expects a quoted string");
        std::string out;
        for (std::size_t i = 1; i + 1 < v.size(); ++i) {
            if (v[i] == '\\') {
                if (i + 2 >= v.size() || (v[i + 1] != '"' && v[i + 1] != '\\'))
                    fail_at(ErrorCode::ConfigSyntax, e.line, "bad escape in '" + qualified(key) + "'");
                out += v[++i];
            } else if (v[i] == '"') {
                fail_at(ErrorCode::ConfigSyntax, e.line, "stray quote in '" + qualified(key) + "'");
            } else {
                out += v[i];
            }
        }
        return out;
    }

    std::vector<ModeSpec> modes(std::string_view key) const
    {
        const Entry& e = entry(key);
        std::vector<ModeSpec> out;
        std::string_view rest = e.value;
        while (true) {
            const std::size_t comma = rest.find(',');
            out.push_back(mode_token(trim(rest.substr(0, comma)), e.line, key));
            if (comma == std::string_view::npos)
                break;
            rest.remove_prefix(comma + 1);
        }
        return out;
    }

    std::vector<MapKind> kinds(std::string_view key) const
    {
        const Entry& e = entry(key);
        std::vector<MapKind> out;
        std::string_view rest = e.value;
        while (true) {
            const std::size_t comma = rest.find(',');
            const std::string_view tok = trim(rest.substr(0, comma));
            const auto k = parse_map_kind(tok);
            if (!k)
                fail_at(ErrorCode::RangeViolation, e.line,
                        "key '" + qualified(key) + "' must list reflection, conversion-as or conversion-s (got '" +
                            std::string(tok) + "')");
            if (std::find(out.begin(), out.end(), *k) != out.end())
                fail_at(ErrorCode::ConfigSyntax, e.line, "key '" + qualified(key) + "' repeats '" + std::string(tok) + "'");
            out.push_back(*k);
            if (comma == std::string_view::npos)
                break;
            rest.remove_prefix(comma + 1);
        }
        return out;
    }

    ModeSpec mode(std::string_view key) const { return mode_token(entry(key).value, line(key), key); }

    int line(std::string_view key) const { return entry(key).line; }
    int section_line() const { return sec_.line; }
    std::string qualified(std::string_view key) const
    {
        return name_.empty() ? std::string(key) : name_ + "." + std::string(key);
    }

    [[noreturn]] void range_error(std::string_view key, std::string_view what) const
    {
        fail_at(ErrorCode::RangeViolation, line(key), "key '" + qualified(key) + "' " + std::string(what));
    }

    void require_key(std::string_view key) const { (void)entry(key); }

private:
    const Entry& entry(std::string_view key) const
    {
        const auto it = sec_.keys.find(key);
        if (it == sec_.keys.end())
            fail_at(ErrorCode::ConfigSyntax, sec_.line, "missing required key '" + qualified(key) + "'");
        return it->second;
    }

    // Number then optional unit text. The number is read with from_chars so
    // every value is the correctly rounded double of its decimal.
    std::pair<double, std::string_view> split_number(const Entry& e, std::string_view key) const
    {
        std::string_view v = e.value;
        double x = 0.0;
        const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
        if (ec != std::errc() || p == v.data())
            fail_at(ErrorCode::ConfigSyntax, e.line, "key '" + qualified(key) + "' expects a number");
        if (!std::isfinite(x))
            fail_at(ErrorCode::RangeViolation, e.line, "key '" + qualified(key) + "' must be finite");
        const std::size_t used = static_cast<std::size_t>(p - v.data());
        return {x, trim(v.substr(used))};
    }

    double quantity_at(const Entry& e, std::string_view key, Quantity q, bool to_angular = true) const
    {
        const auto [plain, unit] = split_number(e, key);
        if (unit.empty())
            fail_at(ErrorCode::UnitMissing, e.line,
                    "key '" + qualified(key) + "' needs a unit suffix (" + unit_list(q) + ")");
        const UnitDef* def = nullptr;
        for (const UnitDef& u : units_of(q))
            if (u.name == unit)
                def = &u;
        if (!def)
            fail_at(ErrorCode::UnitMissing, e.line,
                    "key '" + qualified(key) + "' has unrecognized unit '" + std::string(unit) + "' (expected " +
                        unit_list(q) + ")");
        // Shift the decimal exponent instead of multiplying so "4.6 GHz"
        // reads as the nearest double to 4.6e9.
        double x = plain;
        if (def->exponent != 0) {
            const std::string_view number = trim(std::string_view(e.value).substr(0, e.value.size() - unit.size()));
            const std::size_t epos = number.find_first_of("eE");
            int exp10 = def->exponent;
            if (epos != std::string_view::npos) {
                int own = 0;
                std::from_chars(number.data() + epos + 1 + (number[epos + 1] == '+' ? 1 : 0),
                                number.data() + number.size(), own);
                exp10 += own;
            }
            const std::string shifted = std::string(number.substr(0, epos)) + "e" + std::to_string(exp10);
            std::from_chars(shifted.data(), shifted.data() + shifted.size(), x);
            if (!std::isfinite(x))
                fail_at(ErrorCode::RangeViolation, e.line, "key '" + qualified(key) + "' must be finite");
        }
        if (q == Quantity::Frequency && to_angular && !def->angular_rate)
            x = angular(x);
        if (q == Quantity::Frequency && !to_angular && def->angular_rate)
            x = ordinary(x);
        return x;
    }

    ModeSpec mode_token(std::string_view tok, int line, std::string_view key) const
    {
        const std::size_t colon = tok.find(':');
        ModeSpec m;
        const std::string_view fam = colon == std::string_view::npos ? tok : tok.substr(0, colon);
        if (fam == "mssw")
            m.family = ModeFamily::MSSW;
        else if (fam == "bvmsw")
            m.family = ModeFamily::BVMSW;
        else
            fail_at(ErrorCode::ConfigSyntax, line,
                    "key '" + qualified(key) + "' expects modes like mssw:1 or bvmsw:2 (got '" + std::string(tok) + "')");
        const std::string_view idx = colon == std::string_view::npos ? std::string_view{} : tok.substr(colon + 1);
        const auto [p, ec] = std::from_chars(idx.data(), idx.data() + idx.size(), m.index);
        if (idx.empty() || ec != std::errc() || p != idx.data() + idx.size())
            fail_at(ErrorCode::ConfigSyntax, line, "key '" + qualified(key) + "' has a malformed mode index");
        if (m.index < 1)
            fail_at(ErrorCode::RangeViolation, line, "key '" + qualified(key) + "' mode index must be >= 1");
        return m;
    }

    std::string name_;
    const Section& sec_;
};

void require_positive(const Reader& r, std::string_view key, double v)
{
    if (!(v > 0.0))
        r.range_error(key, "must be positive");
}

void require_non_negative(const Reader& r, std::string_view key, double v)
{
    if (!(v >= 0.0))
        r.range_error(key, "must be non-negative");
}

SweepAxis read_axis(const Reader& r, const std::string& prefix, Quantity q, bool keep_hz)
{
    SweepAxis a;
    a.name = prefix;
    const std::string start = prefix + "_start", stop = prefix + "_stop", points = prefix + "_points",
                      spacing = prefix + "_spacing";
    a.start = keep_hz ? r.hz(start) : r.quantity(start, q);
    a.stop = keep_hz ? r.hz(stop) : r.quantity(stop, q);
    a.points = r.integer(points);
    if (r.has(spacing))
        a.spacing = r.choice<AxisSpacing>(spacing, {{"linear", AxisSpacing::Linear}, {"log", AxisSpacing::Log}});
    if (a.points < 2 || a.points > max_axis_points)
        r.range_error(points, "must lie in [2, " + std::to_string(max_axis_points) + "]");
    if (!(a.stop > a.start))
        r.range_error(stop, "must exceed " + r.qualified(start));
    if (a.spacing == AxisSpacing::Log && !(a.start > 0.0))
        r.range_error(start, "must be positive on a log axis");
    return a;
}

Bounds read_bounds(const Reader& r, const std::string& prefix, Quantity q, bool keep_hz)
{
    const std::string lo = prefix + "_lo", hi = prefix + "_hi";
    Bounds b{keep_hz ? r.hz(lo) : r.quantity(lo, q), keep_hz ? r.hz(hi) : r.quantity(hi, q)};
    if (!(b.lo > 0.0))
        r.range_error(lo, "must be positive");
    if (!(b.hi > b.lo))
        r.range_error(hi, "must exceed " + r.qualified(lo));
    return b;
}

OscillatorParams read_port(const Reader& r, std::string_view omega_key)
{
    OscillatorParams p;
    p.omega = r.quantity(omega_key, Quantity::Frequency);
    p.kappa_ext = r.quantity("kappa_ext", Quantity::Frequency);
    p.gamma_int = r.quantity("gamma_int", Quantity::Frequency);
    require_positive(r, omega_key, p.omega);
    require_positive(r, "kappa_ext", p.kappa_ext);
    require_non_negative(r, "gamma_int", p.gamma_int);
    return p;
}

const Section empty_section{};

} // namespace

std::string_view to_string(MapKind kind) noexcept
{
    switch (kind) {
    case MapKind::Reflection: return "reflection";
    case MapKind::ConversionAS: return "conversion-as";
    case MapKind::ConversionS: return "conversion-s";
    }
    return "reflection";
}

std::optional<MapKind> parse_map_kind(std::string_view s) noexcept
{
    for (MapKind k : {MapKind::Reflection, MapKind::ConversionAS, MapKind::ConversionS})
        if (to_string(k) == s)
            return k;
    return std::nullopt;
}

std::string_view to_string(ModeFamily family) noexcept
{
    return family == ModeFamily::MSSW ? "mssw" : "bvmsw";
}

std::string to_string(const ModeSpec& mode)
{
    return std::string(to_string(mode.family)) + ":" + std::to_string(mode.index);
}

MagnetostaticMode resolve(const ModeSpec& spec, const MaterialGeometry& geom, WavevectorModel model)
{
    return make_mode(spec.family, spec.index, geom, model);
}

std::string format_double(double v)
{
    char buf[64];
    const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, p);
}

RunConfig parse_config(std::string_view text)
{
    const auto doc = tokenize(text);
    auto section = [&](const std::string& name) -> std::optional<Reader> {
        const auto it = doc.find(name);
        if (it == doc.end())
            return std::nullopt;
        return Reader(name, it->second);
    };
    auto required = [&](const std::string& name) {
        auto r = section(name);
        if (!r)
            fail(ErrorCode::ConfigSyntax, "missing required section [" + name + "]");
        return *r;
    };

    RunConfig cfg;
    const Reader top = required("");
    if (!top.has("schema_version"))
        fail(ErrorCode::ConfigSyntax, "missing schema_version");
    cfg.schema_version = top.integer("schema_version");
    if (cfg.schema_version != config_schema_version)
        top.range_error("schema_version", "must be " + std::to_string(config_schema_version));

    TransducerConfig& t = cfg.transducer;
    t.microwave = read_port(required("microwave"), "omega");
    {
        const Reader r = required("magnon");
        t.magnon.omega_m = r.quantity("omega_m", Quantity::Frequency);
        t.magnon.gamma_m = r.quantity("gamma_m", Quantity::Frequency);
        require_positive(r, "omega_m", t.magnon.omega_m);
        require_positive(r, "gamma_m", t.magnon.gamma_m);
    }
    {
        const Reader r = required("optical");
        t.optical = read_port(r, "omega");
        cfg.optical_wavelength = r.opt_quantity("wavelength", Quantity::Length);
        cfg.optical_fsr = r.opt_hz("fsr");
        if (cfg.optical_wavelength)
            require_positive(r, "wavelength", *cfg.optical_wavelength);
        if (cfg.optical_fsr)
            require_positive(r, "fsr", *cfg.optical_fsr);
    }
    {
        const Reader r = required("coupling");
        t.g_ma = r.quantity("g_ma", Quantity::Frequency);
        require_non_negative(r, "g_ma", t.g_ma);
        t.g_mb_single = r.opt_quantity("g_mb_single", Quantity::Frequency);
        if (r.has("pump_amplitude"))
            t.pump_amplitude = r.real("pump_amplitude");
        if (t.g_mb_single)
            require_non_negative(r, "g_mb_single", *t.g_mb_single);
        if (t.pump_amplitude)
            require_non_negative(r, "pump_amplitude", *t.pump_amplitude);
        if (r.has("g_mb")) {
            t.g_mb = r.quantity("g_mb", Quantity::Frequency);
            require_non_negative(r, "g_mb", t.g_mb);
            if (t.g_mb_single && t.pump_amplitude) {
                const double expected = *t.g_mb_single * *t.pump_amplitude;
                if (std::abs(t.g_mb - expected) > 1e-12 * std::max(expected, 1.0))
                    r.range_error("g_mb", "must equal g_mb_single * pump_amplitude");
            }
        } else if (t.g_mb_single && t.pump_amplitude) {
            t.g_mb = *t.g_mb_single * *t.pump_amplitude;
        } else {
            r.require_key("g_mb");
        }
        if (r.has("process"))
            t.process = r.choice<Process>("process", {{"anti-stokes", Process::AntiStokes}, {"stokes", Process::Stokes}});
        cfg.detuning_given = r.has("sideband_detuning");
        if (cfg.detuning_given)
            t.sideband_detuning = r.quantity("sideband_detuning", Quantity::Frequency);
        else
            t = with_triple_resonance(t);
    }
    try {
        validate(t);
    } catch (const Error& e) {
        fail(ErrorCode::RangeViolation, std::string("transducer: ") + e.what());
    }

    if (const auto r = section("geometry")) {
        cfg.geometry_given = true;
        MaterialGeometry& g = cfg.geometry;
        if (r->has("mu0_HM"))
            g.mu0_HM = r->quantity("mu0_HM", Quantity::Field);
        g.d = r->quantity("thickness", Quantity::Length);
        g.l1 = r->quantity("l1", Quantity::Length);
        g.l2 = r->quantity("l2", Quantity::Length);
        if (r->has("gyro_over_2pi"))
            g.gyro_over_2pi = r->quantity("gyro_over_2pi", Quantity::Gyro);
        for (const auto& [key, v] : {std::pair<const char*, double>{"mu0_HM", g.mu0_HM}, {"thickness", g.d},
                                     {"l1", g.l1}, {"l2", g.l2}, {"gyro_over_2pi", g.gyro_over_2pi}})
            if (r->has(key))
                require_positive(*r, key, v);
        if (r->has("wavevector"))
            cfg.wavevector = r->choice<WavevectorModel>(
                "wavevector", {{"propagation-axis", WavevectorModel::PropagationAxis},
                               {"magnitude", WavevectorModel::Magnitude}});
    }

    if (const auto r = section("simulate"))
        cfg.simulate = SimulateBlock{read_axis(*r, "probe", Quantity::Frequency, true)};

    if (const auto r = section("map2d")) {
        Map2dBlock b;
        b.field = read_axis(*r, "field", Quantity::Field, false);
        b.freq = read_axis(*r, "freq", Quantity::Frequency, true);
        b.kinds = r->kinds("kind");
        b.modes = r->modes("modes");
        if (r->has("optical_mode")) {
            const int idx = r->integer("optical_mode");
            if (idx < 0 || static_cast<std::size_t>(idx) >= b.modes.size())
                r->range_error("optical_mode", "must index into modes");
            b.optical_mode = static_cast<std::size_t>(idx);
        }
        if (r->has("mssw_scale"))
            b.profile.mssw_scale = r->real("mssw_scale");
        if (r->has("bvmsw_scale"))
            b.profile.bvmsw_scale = r->real("bvmsw_scale");
        if (r->has("bvmsw_power"))
            b.profile.bvmsw_power = r->real("bvmsw_power");
        if (b.field.start <= 0.0)
            r->range_error("field_start", "must be positive");
        require_non_negative(*r, "mssw_scale", b.profile.mssw_scale);
        require_non_negative(*r, "bvmsw_scale", b.profile.bvmsw_scale);
        cfg.map2d = b;
    }

    if (const auto r = section("fsrscan")) {
        FsrScanBlock b;
        b.mode = r->mode("mode");
        b.fsr = read_axis(*r, "fsr", Quantity::Frequency, true);
        if (b.fsr.start <= 0.0)
            r->range_error("fsr_start", "must be positive");
        if (r->has("model"))
            b.model = r->choice<EfficiencyModel>("model", {{"closed-form", EfficiencyModel::ClosedForm},
                                                           {"steady-state", EfficiencyModel::SteadyState}});
        cfg.fsrscan = b;
    }

    if (const auto r = section("fit")) {
        FitBlock b;
        b.kind = r->choice<FitKind>("kind", {{"reflection", FitKind::Reflection},
                                             {"lorentzian", FitKind::Lorentzian},
                                             {"avoided-crossing", FitKind::AvoidedCrossing}});
        b.input = r->string("input");
        if (b.input.empty())
            r->range_error("input", "must not be empty");
        if (r->has("scale"))
            b.scale = r->choice<TraceScale>("scale", {{"linear", TraceScale::Linear}, {"decibel", TraceScale::Decibel}});
        if (r->has("regime"))
            b.regime = r->choice<CouplingRegime>(
                "regime", {{"overcoupled", CouplingRegime::Overcoupled}, {"undercoupled", CouplingRegime::Undercoupled}});
        const bool any_window = r->has("window_field_lo") || r->has("window_field_hi") || r->has("window_freq_lo") ||
                                r->has("window_freq_hi");
        if (any_window) {
            const Bounds f = read_bounds(*r, "window_field", Quantity::Field, false);
            const Bounds w = read_bounds(*r, "window_freq", Quantity::Frequency, true);
            b.window = FitWindow{f.lo, f.hi, w.lo, w.hi};
        }
        cfg.fit = b;
    }

    if (const auto r = section("optimize")) {
        OptimizeBlock b;
        b.target = r->choice<OptimizeTarget>("target", {{"kappa-a", OptimizeTarget::KappaA},
                                                        {"triple-resonance", OptimizeTarget::TripleResonance},
                                                        {"gmb", OptimizeTarget::Gmb}});
        if (r->has("kappa_start") || b.target == OptimizeTarget::KappaA)
            b.kappa = read_axis(*r, "kappa", Quantity::Frequency, false);
        if (r->has("gmb_start") || b.target == OptimizeTarget::Gmb)
            b.gmb = read_axis(*r, "gmb", Quantity::Frequency, false);
        if (b.kappa && !(b.kappa->start > 0.0))
            r->range_error("kappa_start", "must be positive");
        if (b.gmb && !(b.gmb->start >= 0.0))
            r->range_error("gmb_start", "must be non-negative");
        if (r->has("mode") || b.target == OptimizeTarget::TripleResonance)
            b.mode = r->mode("mode");
        if (r->has("fsr_lo") || r->has("fsr_hi") || b.target == OptimizeTarget::TripleResonance)
            b.fsr = read_bounds(*r, "fsr", Quantity::Frequency, true);
        if (r->has("field_lo") || r->has("field_hi") || b.target == OptimizeTarget::TripleResonance)
            b.field = read_bounds(*r, "field", Quantity::Field, false);
        if (r->has("rounds")) {
            b.rounds = r->integer("rounds");
            if (b.rounds < 1 || b.rounds > 100)
                r->range_error("rounds", "must lie in [1, 100]");
        }
        cfg.optimize = b;
    }

    if (const auto r = section("dispersion")) {
        DispersionBlock b;
        b.family = r->choice<ModeFamily>("family", {{"mssw", ModeFamily::MSSW}, {"bvmsw", ModeFamily::BVMSW}});
        b.max_index = r->integer("max_index");
        if (b.max_index < 1 || b.max_index > 10000)
            r->range_error("max_index", "must lie in [1, 10000]");
        b.field = r->quantity("field", Quantity::Field);
        require_positive(*r, "field", b.field);
        cfg.dispersion = b;
    }

    if (const auto r = section("report")) {
        ReportBlock b{r->real("eta"), r->real("eta_int")};
        if (!(b.eta > 0.0 && b.eta <= 1.0))
            r->range_error("eta", "must lie in (0, 1]");
        if (!(b.eta_int >= b.eta && b.eta_int <= 1.0))
            r->range_error("eta_int", "must lie in [eta, 1]");
        cfg.report = b;
    }

    if (cfg.geometry_given) {
        try {
            validate(cfg.geometry);
        } catch (const Error& e) {
            fail(ErrorCode::RangeViolation, std::string("geometry: ") + e.what());
        }
    }
    return cfg;
}

namespace {

// Angular rates go out as the shortest Hz decimal that maps back to the same
// rad/s value, and in rad/s when no decimal does.
std::string rate(double rad_per_s)
{
    const double f = ordinary(rad_per_s);
    for (int digits = 1; digits <= 17; ++digits) {
        char buf[64];
        const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, f, std::chars_format::general, digits);
        double back = 0.0;
        std::from_chars(buf, p, back);
        if (angular(back) == rad_per_s)
            return format_double(back) + " Hz";
    }
    return format_double(rad_per_s) + " rad/s";
}

std::string hz(double v) { return format_double(v) + " Hz"; }
std::string tesla(double v) { return format_double(v) + " T"; }
std::string metre(double v) { return format_double(v) + " m"; }

std::string quoted(const std::string& s)
{
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\')
            out += '\\';
        out += c;
    }
    return out + "\"";
}

class Writer {
public:
    void section(std::string_view name) { out_ << "\n[" << name << "]\n"; }
    void kv(std::string_view key, const std::string& value) { out_ << key << " = " << value << "\n"; }

    void axis(const SweepAxis& a, std::string (*fmt)(double))
    {
        kv(a.name + "_start", fmt(a.start));
        kv(a.name + "_stop", fmt(a.stop));
        kv(a.name + "_points", std::to_string(a.points));
        kv(a.name + "_spacing", a.spacing == AxisSpacing::Log ? "log" : "linear");
    }

    std::string str() const { return out_.str(); }

private:
    std::ostringstream out_;
};

} // namespace

std::string serialize_config(const RunConfig& cfg)
{
    Writer w;
    w.kv("schema_version", std::to_string(cfg.schema_version));
    const TransducerConfig& t = cfg.transducer;

    w.section("microwave");
    w.kv("omega", rate(t.microwave.omega));
    w.kv("kappa_ext", rate(t.microwave.kappa_ext));
    w.kv("gamma_int", rate(t.microwave.gamma_int));

    w.section("magnon");
    w.kv("omega_m", rate(t.magnon.omega_m));
    w.kv("gamma_m", rate(t.magnon.gamma_m));

    w.section("optical");
    w.kv("omega", rate(t.optical.omega));
    w.kv("kappa_ext", rate(t.optical.kappa_ext));
    w.kv("gamma_int", rate(t.optical.gamma_int));
    if (cfg.optical_wavelength)
        w.kv("wavelength", metre(*cfg.optical_wavelength));
    if (cfg.optical_fsr)
        w.kv("fsr", hz(*cfg.optical_fsr));

    w.section("coupling");
    w.kv("g_ma", rate(t.g_ma));
    w.kv("g_mb", rate(t.g_mb));
    if (t.g_mb_single)
        w.kv("g_mb_single", rate(*t.g_mb_single));
    if (t.pump_amplitude)
        w.kv("pump_amplitude", format_double(*t.pump_amplitude));
    if (cfg.detuning_given)
        w.kv("sideband_detuning", rate(t.sideband_detuning));
    w.kv("process", t.process == Process::AntiStokes ? "anti-stokes" : "stokes");

    if (cfg.geometry_given) {
        const MaterialGeometry& g = cfg.geometry;
        w.section("geometry");
        w.kv("mu0_HM", tesla(g.mu0_HM));
        w.kv("thickness", metre(g.d));
        w.kv("l1", metre(g.l1));
        w.kv("l2", metre(g.l2));
        w.kv("gyro_over_2pi", format_double(g.gyro_over_2pi) + " Hz/T");
        w.kv("wavevector", cfg.wavevector == WavevectorModel::PropagationAxis ? "propagation-axis" : "magnitude");
    }

    if (cfg.simulate) {
        w.section("simulate");
        w.axis(cfg.simulate->probe, hz);
    }
    if (cfg.map2d) {
        const Map2dBlock& b = *cfg.map2d;
        w.section("map2d");
        w.axis(b.field, tesla);
        w.axis(b.freq, hz);
        std::string kinds;
        for (MapKind k : b.kinds)
            kinds += (kinds.empty() ? "" : ", ") + std::string(to_string(k));
        w.kv("kind", kinds);
        std::string modes;
        for (const ModeSpec& m : b.modes)
            modes += (modes.empty() ? "" : ", ") + to_string(m);
        w.kv("modes", modes);
        w.kv("optical_mode", std::to_string(b.optical_mode));
        w.kv("mssw_scale", format_double(b.profile.mssw_scale));
        w.kv("bvmsw_scale", format_double(b.profile.bvmsw_scale));
        w.kv("bvmsw_power", format_double(b.profile.bvmsw_power));
    }
    if (cfg.fsrscan) {
        const FsrScanBlock& b = *cfg.fsrscan;
        w.section("fsrscan");
        w.kv("mode", to_string(b.mode));
        w.axis(b.fsr, hz);
        w.kv("model", b.model == EfficiencyModel::ClosedForm ? "closed-form" : "steady-state");
    }
    if (cfg.fit) {
        const FitBlock& b = *cfg.fit;
        w.section("fit");
        w.kv("kind", b.kind == FitKind::Reflection   ? "reflection"
                     : b.kind == FitKind::Lorentzian ? "lorentzian"
                                                     : "avoided-crossing");
        w.kv("input", quoted(b.input));
        w.kv("scale", b.scale == TraceScale::Linear ? "linear" : "decibel");
        w.kv("regime", b.regime == CouplingRegime::Overcoupled ? "overcoupled" : "undercoupled");
        if (b.window) {
            w.kv("window_field_lo", tesla(b.window->field_lo));
            w.kv("window_field_hi", tesla(b.window->field_hi));
            w.kv("window_freq_lo", hz(b.window->freq_lo));
            w.kv("window_freq_hi", hz(b.window->freq_hi));
        }
    }
    if (cfg.optimize) {
        const OptimizeBlock& b = *cfg.optimize;
        w.section("optimize");
        w.kv("target", b.target == OptimizeTarget::KappaA            ? "kappa-a"
                       : b.target == OptimizeTarget::TripleResonance ? "triple-resonance"
                                                                      : "gmb");
        if (b.kappa)
            w.axis(*b.kappa, rate);
        if (b.gmb)
            w.axis(*b.gmb, rate);
        if (b.mode)
            w.kv("mode", to_string(*b.mode));
        if (b.fsr) {
            w.kv("fsr_lo", hz(b.fsr->lo));
            w.kv("fsr_hi", hz(b.fsr->hi));
        }
        if (b.field) {
            w.kv("field_lo", tesla(b.field->lo));
            w.kv("field_hi", tesla(b.field->hi));
        }
        w.kv("rounds", std::to_string(b.rounds));
    }
    if (cfg.dispersion) {
        w.section("dispersion");
        w.kv("family", std::string(to_string(cfg.dispersion->family)));
        w.kv("max_index", std::to_string(cfg.dispersion->max_index));
        w.kv("field", tesla(cfg.dispersion->field));
    }
    if (cfg.report) {
        w.section("report");
        w.kv("eta", format_double(cfg.report->eta));
        w.kv("eta_int", format_double(cfg.report->eta_int));
    }
    return w.str();
}

} // namespace magconv
