#include "aodmap/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "aodmap/error.hpp"

namespace aodmap::io {

using nlohmann::json;

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string read_text(const fs::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw IoError("cannot open " + file.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const fs::path& file, const std::string& text) {
    if (file.has_parent_path()) fs::create_directories(file.parent_path());
    std::ofstream out(file, std::ios::binary);
    if (!out) throw IoError("cannot write " + file.string());
    out << text;
    if (!out) throw IoError("write failed for " + file.string());
}

namespace {

json parse_json(const fs::path& file) {
    try {
        return json::parse(read_text(file));
    } catch (const json::exception& e) {
        throw IoError(file.string() + ": " + e.what());
    }
}

template <class T>
T get(const json& j, const char* key, const fs::path& file) {
    if (!j.contains(key)) throw IoError(file.string() + ": missing key '" + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw IoError(file.string() + ": key '" + key + "': " + e.what());
    }
}

std::vector<std::vector<double>> read_csv(const fs::path& file, bool header) {
    std::istringstream in(read_text(file));
    std::vector<std::vector<double>> rows;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (header && lineno == 1) continue;
        if (line.empty()) continue;
        std::vector<double> row;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) {
            char* end = nullptr;
            const double v = std::strtod(cell.c_str(), &end);
            if (end == cell.c_str() || *end != '\0')
                throw IoError(file.string() + ":" + std::to_string(lineno) + ": bad number '" + cell + "'");
            row.push_back(v);
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string join_row(std::span<const double> row) {
    std::string s;
    for (std::size_t i = 0; i < row.size(); ++i) {
        if (i) s += ',';
        s += format_double(row[i]);
    }
    return s;
}

}  // namespace

void write_scene(const fs::path& dir, const SceneBundle& b) {
    const Scene& s = b.scene;
    validate(s);
    json mask = json::array();
    for (bool m : s.channel_mask) mask.push_back(m);
    json j = {
        {"width", s.width},
        {"height", s.height},
        {"channels", s.channels},
        {"region_size_km", s.region_size_km},
        {"channel_mask", mask},
        {"components", b.components},
        {"forward_model",
         {{"type", b.forward.type},
          {"channels", b.forward.channels},
          {"knots", b.forward.knots},
          {"tau_max", b.forward.tau_max},
          {"seed", b.forward.seed},
          {"table", b.forward.table_path}}},
    };
    write_text(dir / "scene.json", j.dump(2) + "\n");
    std::string csv;
    for (int p = 0; p < s.regions(); ++p) csv += join_row(s.row(p)) + "\n";
    write_text(dir / "radiance.csv", csv);
}

SceneBundle read_scene(const fs::path& dir) {
    const fs::path meta = dir / "scene.json";
    if (!fs::exists(meta)) throw IoError("scene metadata not found: " + meta.string());
    const json j = parse_json(meta);
    SceneBundle b;
    Scene& s = b.scene;
    s.width = get<int>(j, "width", meta);
    s.height = get<int>(j, "height", meta);
    s.channels = get<int>(j, "channels", meta);
    s.region_size_km = j.value("region_size_km", 17.6);
    s.channel_mask = j.contains("channel_mask") ? get<std::vector<bool>>(j, "channel_mask", meta)
                                                : std::vector<bool>(static_cast<std::size_t>(s.channels), true);
    b.components = j.value("components", std::string("default"));
    if (j.contains("forward_model")) {
        const json& f = j.at("forward_model");
        b.forward.type = f.value("type", std::string("synthetic"));
        b.forward.channels = f.value("channels", s.channels);
        b.forward.knots = f.value("knots", 25);
        b.forward.tau_max = f.value("tau_max", 6.0);
        b.forward.seed = f.value("seed", std::uint64_t{0});
        b.forward.table_path = f.value("table", std::string());
    } else {
        b.forward.channels = s.channels;
    }

    const auto rows = read_csv(dir / "radiance.csv", false);
    if (static_cast<int>(rows.size()) != s.regions())
        throw IoError("radiance.csv has " + std::to_string(rows.size()) + " rows, expected " +
                      std::to_string(s.regions()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (static_cast<int>(rows[r].size()) != s.channels)
            throw IoError("radiance.csv row " + std::to_string(r + 1) + " has " + std::to_string(rows[r].size()) +
                          " columns, expected " + std::to_string(s.channels));
        s.radiance.insert(s.radiance.end(), rows[r].begin(), rows[r].end());
    }
    try {
        validate(s);
    } catch (const ConfigError& e) {
        throw IoError(dir.string() + ": " + e.what());
    }
    return b;
}

void write_components(const fs::path& file, const ComponentLibrary& lib) {
    json arr = json::array();
    for (const auto& c : lib.components)
        arr.push_back({{"id", c.id},
                       {"category", c.category},
                       {"r_min", c.r_min},
                       {"r_max", c.r_max},
                       {"r_c", c.r_c},
                       {"width", c.width},
                       {"ssa_558", c.ssa_558}});
    write_text(file, arr.dump(2) + "\n");
}

ComponentLibrary read_components(const fs::path& file) {
    const json j = parse_json(file);
    if (!j.is_array()) throw IoError(file.string() + ": expected a list of components");
    ComponentLibrary lib;
    for (const auto& e : j) {
        AerosolComponent c;
        c.id = get<int>(e, "id", file);
        c.category = e.value("category", std::string());
        c.r_min = get<double>(e, "r_min", file);
        c.r_max = get<double>(e, "r_max", file);
        c.r_c = get<double>(e, "r_c", file);
        c.width = e.value("width", 0.0);
        c.ssa_558 = get<double>(e, "ssa_558", file);
        lib.components.push_back(c);
    }
    try {
        validate(lib);
    } catch (const ConfigError& err) {
        throw IoError(file.string() + ": " + err.what());
    }
    return lib;
}

ComponentLibrary load_components(const fs::path& scene_dir, const std::string& ref) {
    if (ref.empty() || ref == "default") return default_component_library();
    const fs::path p = fs::path(ref).is_absolute() ? fs::path(ref) : scene_dir / ref;
    return read_components(p);
}

std::unique_ptr<ForwardModel> make_forward(const ForwardSpec& spec, const ComponentLibrary& library,
                                           const fs::path& scene_dir) {
    if (spec.type == "synthetic") {
        SyntheticTableOptions o;
        o.channels = spec.channels;
        o.knots = spec.knots;
        o.tau_max = spec.tau_max;
        o.seed = spec.seed;
        return std::make_unique<TableForwardModel>(build_synthetic_table(library, o));
    }
    if (spec.type == "table") {
        const fs::path p = fs::path(spec.table_path).is_absolute() ? fs::path(spec.table_path)
                                                                    : scene_dir / spec.table_path;
        RadianceTable t = read_table(p);
        if (t.components != library.size()) throw IoError("table component count does not match the library");
        return std::make_unique<TableForwardModel>(std::move(t));
    }
    throw IoError("unknown forward model type '" + spec.type + "'");
}

void write_table(const fs::path& json_file, const RadianceTable& t) {
    fs::path csv = json_file;
    csv.replace_extension(".csv");
    json j = {{"knots", t.tau_knots},
              {"components", t.components},
              {"channels", t.channels},
              {"seed", t.seed},
              {"values", csv.filename().string()}};
    write_text(json_file, j.dump(2) + "\n");
    std::string body;
    for (int m = 0; m < t.components; ++m)
        for (int k = 0; k < t.knots(); ++k) body += join_row(t.knot_row(m, k)) + "\n";
    write_text(csv, body);
}

RadianceTable read_table(const fs::path& json_file) {
    const json j = parse_json(json_file);
    RadianceTable t;
    t.tau_knots = get<std::vector<double>>(j, "knots", json_file);
    t.components = get<int>(j, "components", json_file);
    t.channels = get<int>(j, "channels", json_file);
    t.seed = j.value("seed", std::uint64_t{0});
    const fs::path csv = json_file.parent_path() / get<std::string>(j, "values", json_file);
    const auto rows = read_csv(csv, false);
    if (rows.size() != static_cast<std::size_t>(t.components) * t.tau_knots.size())
        throw IoError(csv.string() + ": row count does not match components x knots");
    for (const auto& r : rows) {
        if (static_cast<int>(r.size()) != t.channels) throw IoError(csv.string() + ": column count mismatch");
        t.values.insert(t.values.end(), r.begin(), r.end());
    }
    try {
        validate(t);
    } catch (const ConfigError& e) {
        throw IoError(json_file.string() + ": " + e.what());
    }
    return t;
}

void write_truth(const fs::path& file, const Truth& t) {
    const int M = t.components;
    std::string s = "region,tau";
    for (int m = 1; m <= M; ++m) s += ",theta_" + std::to_string(m);
    s += "\n";
    for (std::size_t p = 0; p < t.tau.size(); ++p) {
        s += std::to_string(p) + "," + format_double(t.tau[p]) + "," +
             join_row(std::span<const double>(t.theta.data() + p * M, static_cast<std::size_t>(M))) + "\n";
    }
    write_text(file, s);
}

Truth read_truth(const fs::path& file, int width, int height) {
    const auto rows = read_csv(file, true);
    Truth t;
    t.width = width;
    t.height = height;
    if (static_cast<int>(rows.size()) != width * height) throw IoError(file.string() + ": region count mismatch");
    if (rows.empty() || rows[0].size() < 4) throw IoError(file.string() + ": too few columns");
    t.components = static_cast<int>(rows[0].size()) - 2;
    for (const auto& r : rows) {
        if (static_cast<int>(r.size()) != t.components + 2) throw IoError(file.string() + ": ragged rows");
        t.tau.push_back(r[1]);
        t.theta.insert(t.theta.end(), r.begin() + 2, r.end());
    }
    return t;
}

void write_state(const fs::path& file, const RetrievalState& st) {
    json j = {{"components", st.components},
              {"kappa", st.kappa},
              {"sigma2", st.sigma2},
              {"tau", st.tau},
              {"theta", st.theta}};
    write_text(file, j.dump() + "\n");
}

RetrievalState read_state(const fs::path& file) {
    const json j = parse_json(file);
    RetrievalState st;
    st.components = get<int>(j, "components", file);
    st.kappa = get<double>(j, "kappa", file);
    st.sigma2 = get<std::vector<double>>(j, "sigma2", file);
    st.tau = get<std::vector<double>>(j, "tau", file);
    st.theta = get<std::vector<double>>(j, "theta", file);
    if (st.components < 1 || st.theta.size() != st.tau.size() * static_cast<std::size_t>(st.components))
        throw IoError(file.string() + ": theta size does not match tau and components");
    return st;
}

void write_trace(const fs::path& file, const SweepTrace& trace) {
    std::string s = "sweep,log_posterior,tau_accept_rate,theta_accept_rate,kappa,elapsed_ms\n";
    for (const auto& r : trace.sweeps)
        s += std::to_string(r.sweep) + "," + format_double(r.log_posterior) + "," +
             format_double(r.tau_accept_rate()) + "," + format_double(r.theta_accept_rate()) + "," +
             format_double(r.kappa) + "," + format_double(r.elapsed_ms) + "\n";
    write_text(file, s);
}

void write_speedup(const fs::path& file, const std::vector<SpeedupRecord>& records) {
    std::string s = "n_patches,sweep,elapsed_ms\n";
    for (const auto& rec : records)
        for (std::size_t i = 0; i < rec.sweep_ms.size(); ++i)
            s += std::to_string(rec.n_patches) + "," + std::to_string(i + 1) + "," + format_double(rec.sweep_ms[i]) +
                 "\n";
    write_text(file, s);
}

void write_metrics(const fs::path& file, const MetricsReport& r, const std::string& method) {
    json j = {{"method", method},
              {"rmse", r.rmse},
              {"mean_bias", r.mean_bias},
              {"count", r.count},
              {"correlation_defined", r.correlation_defined}};
    j["correlation"] = r.correlation_defined ? json(r.correlation) : json(nullptr);
    write_text(file, j.dump(2) + "\n");
}

void write_grid(const fs::path& file, const std::vector<double>& field, int width) {
    std::string s;
    for (std::size_t i = 0; i < field.size(); i += static_cast<std::size_t>(width))
        s += join_row(std::span<const double>(field.data() + i, static_cast<std::size_t>(width))) + "\n";
    write_text(file, s);
}

void write_rows(const fs::path& file, const std::vector<double>& values, int columns) {
    write_grid(file, values, columns);
}

void write_slice(const fs::path& stem, const PosteriorSlice& slice) {
    fs::path base = stem;
    write_grid(base.string() + ".csv", slice.values, static_cast<int>(slice.tau.size()));
    write_rows(base.string() + "_tau.csv", slice.tau, 1);
    write_rows(base.string() + "_theta.csv", slice.theta, 1);
}

}  // namespace aodmap::io
