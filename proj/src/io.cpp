#include "flatlab/io.hpp"

#include <fstream>
#include <sstream>

namespace flatlab {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

std::ofstream open_out(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary); // binary keeps LF endings everywhere
    if (!out) throw ConfigError("cannot open '" + path.string() + "' for writing");
    return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open '" + path.string() + "'");
    return in;
}

void write_meta(std::ofstream& out, const std::map<std::string, std::string>& meta) {
    for (const auto& [key, value] : meta) out << "# " << key << " = " << value << "\n";
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> items;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, sep)) items.push_back(item);
    if (!line.empty() && line.back() == sep) items.push_back("");
    return items;
}

bool parse_meta_line(const std::string& line, std::string* key, std::string* value) {
    std::string body = trim(line);
    if (body.empty() || body[0] != '#') return false;
    body = trim(body.substr(1));
    const auto eq = body.find('=');
    if (eq == std::string::npos) return false;
    *key = trim(body.substr(0, eq));
    *value = trim(body.substr(eq + 1));
    return !key->empty();
}

double parse_double(const std::string& text, const std::filesystem::path& path) {
    try {
        return std::stod(text);
    } catch (const std::exception&) {
        throw ConfigError("bad number '" + text + "' in '" + path.string() + "'");
    }
}

} // namespace

void write_csv(const std::filesystem::path& path, const std::map<std::string, std::string>& meta,
               const std::vector<std::string>& columns,
               const std::vector<std::vector<double>>& rows, const char* fmt) {
    auto out = open_out(path);
    write_meta(out, meta);
    for (std::size_t c = 0; c < columns.size(); ++c) out << (c ? "," : "") << columns[c];
    out << "\n";
    for (const auto& row : rows) {
        if (row.size() != columns.size())
            throw ConfigError("csv row width mismatch writing '" + path.string() + "'");
        for (std::size_t c = 0; c < row.size(); ++c)
            out << (c ? "," : "") << format_double(row[c], fmt);
        out << "\n";
    }
}

CsvTable read_csv(const std::filesystem::path& path) {
    auto in = open_in(path);
    CsvTable table;
    std::string line;
    bool have_header = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        std::string key, value;
        if (parse_meta_line(line, &key, &value)) {
            table.meta[key] = value;
            continue;
        }
        if (!have_header) {
            for (auto& col : split(line, ',')) table.columns.push_back(trim(col));
            have_header = true;
            continue;
        }
        const auto items = split(line, ',');
        if (items.size() != table.columns.size())
            throw ConfigError("csv row width mismatch in '" + path.string() + "'");
        std::vector<double> row(items.size());
        for (std::size_t i = 0; i < items.size(); ++i) row[i] = parse_double(items[i], path);
        table.rows.push_back(std::move(row));
    }
    if (!have_header) throw ConfigError("'" + path.string() + "' has no header row");
    return table;
}

std::map<std::string, std::string> read_config_file(const std::filesystem::path& path) {
    auto in = open_in(path);
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(in, line)) {
        const std::string body = trim(line);
        if (body.empty() || body[0] == '#') continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config '" + path.string() + "': expected key = value, got '" +
                              body + "'");
        std::string key = trim(body.substr(0, eq));
        std::string value = trim(body.substr(eq + 1));
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
            value = value.substr(1, value.size() - 2);
        if (key.empty()) throw ConfigError("config '" + path.string() + "': empty key");
        kv[key] = value;
    }
    return kv;
}

void write_samples_csv(const std::filesystem::path& path, const std::vector<SampleSet>& sets) {
    if (sets.empty()) throw ConfigError("write_samples_csv: no sample sets");
    auto out = open_out(path);
    std::map<std::string, std::string> meta = sets[0].provenance;
    meta.erase("traj");
    meta["trajectories"] = std::to_string(sets.size());
    write_meta(out, meta);

    out << "traj,t";
    for (int c = 0; c < sets[0].dim; ++c) out << ",coord_" << c;
    out << "\n";

    for (std::size_t s = 0; s < sets.size(); ++s) {
        const auto& set = sets[s];
        if (set.dim != sets[0].dim) throw ConfigError("write_samples_csv: dimension mismatch");
        const auto cfg = DynamicsConfig::from_map(set.provenance);
        for (std::size_t i = 0; i < set.samples.size(); ++i) {
            const std::int64_t t = cfg.burn_in + static_cast<std::int64_t>(i + 1) * cfg.thinning;
            out << s << "," << t;
            for (double x : set.samples[i]) out << "," << format_double(x, "%.12g");
            out << "\n";
        }
    }
}

void write_histogram_csv(const std::filesystem::path& path,
                         const std::map<std::string, std::string>& meta, const HistogramND& hist) {
    const Axis& axis = hist.axis1d();
    std::vector<std::vector<double>> rows;
    rows.reserve(hist.mass.size());
    for (int b = 0; b < axis.bins; ++b)
        rows.push_back({axis.bin_lo(b), axis.bin_hi(b), hist.mass[static_cast<std::size_t>(b)]});
    write_csv(path, meta, {"bin_lo", "bin_hi", "prob"}, rows, "%.17g");
}

HistogramND read_histogram_csv(const std::filesystem::path& path) {
    const CsvTable table = read_csv(path);
    if (table.columns != std::vector<std::string>{"bin_lo", "bin_hi", "prob"})
        throw ConfigError("'" + path.string() + "' is not a histogram CSV");
    if (table.rows.empty()) throw ConfigError("'" + path.string() + "' has no bins");
    HistogramND h;
    h.axes = {Axis{table.rows.front()[0], table.rows.back()[1],
                   static_cast<int>(table.rows.size())}};
    for (const auto& row : table.rows) h.mass.push_back(row[2]);
    return h;
}

void save_checkpoint(const std::filesystem::path& path, const MLPSpec& spec, const Vec& params) {
    if (static_cast<int>(params.size()) != spec.weight_count())
        throw ConfigError("save_checkpoint: params length does not match the architecture");
    auto out = open_out(path);
    out << "arch=" << spec.arch_string() << ",act=" << activation_name(spec.act)
        << ",loss=" << loss_name(spec.loss) << "\n";
    for (double w : params) out << format_exact(w) << "\n";
}

std::pair<MLPSpec, Vec> load_checkpoint(const std::filesystem::path& path) {
    auto in = open_in(path);
    std::string header;
    if (!std::getline(in, header)) throw ConfigError("'" + path.string() + "': empty checkpoint");
    if (!header.empty() && header.back() == '\r') header.pop_back();

    std::string arch, act = "softplus", loss = "square";
    for (const auto& item : split(header, ',')) {
        const auto eq = item.find('=');
        if (eq == std::string::npos)
            throw ConfigError("'" + path.string() + "': bad checkpoint header");
        const std::string key = trim(item.substr(0, eq));
        const std::string value = trim(item.substr(eq + 1));
        if (key == "arch") arch = value;
        else if (key == "act") act = value;
        else if (key == "loss") loss = value;
        else throw ConfigError("'" + path.string() + "': unknown checkpoint key '" + key + "'");
    }
    if (arch.empty()) throw ConfigError("'" + path.string() + "': checkpoint header missing arch");
    MLPSpec spec = MLPSpec::parse(arch, parse_activation(act), parse_loss(loss));

    Vec params;
    params.reserve(static_cast<std::size_t>(spec.weight_count()));
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        params.push_back(parse_double(line, path));
    }
    if (static_cast<int>(params.size()) != spec.weight_count())
        throw ConfigError("'" + path.string() + "': expected " +
                          std::to_string(spec.weight_count()) + " weights, found " +
                          std::to_string(params.size()));
    return {spec, std::move(params)};
}

namespace {

std::string join_indices(const std::vector<int>& idx) {
    std::string s;
    for (std::size_t i = 0; i < idx.size(); ++i) s += (i ? " " : "") + std::to_string(idx[i]);
    return s;
}

std::vector<int> split_indices(const std::string& text) {
    std::vector<int> idx;
    std::stringstream ss(text);
    int v;
    while (ss >> v) idx.push_back(v);
    return idx;
}

} // namespace

void save_dataset(const std::filesystem::path& path, const LabeledDataset& ds) {
    ds.validate();
    auto out = open_out(path);
    std::map<std::string, std::string> meta;
    meta["classes"] = std::to_string(ds.classes);
    meta["label_mode"] = ds.label_mode;
    meta["train_idx"] = join_indices(ds.train_idx);
    meta["heldout_idx"] = join_indices(ds.heldout_idx);
    write_meta(out, meta);
    for (int j = 0; j < ds.input_dim; ++j) out << "x_" << j << ",";
    out << "label\n";
    for (int i = 0; i < ds.size(); ++i) {
        for (double x : ds.row(i)) out << format_exact(x) << ",";
        out << ds.labels[static_cast<std::size_t>(i)] << "\n";
    }
}

LabeledDataset load_dataset(const std::filesystem::path& path) {
    const CsvTable table = read_csv(path);
    if (table.columns.size() < 2 || table.columns.back() != "label")
        throw ConfigError("'" + path.string() + "' is not a dataset CSV");
    LabeledDataset ds;
    ds.input_dim = static_cast<int>(table.columns.size()) - 1;
    for (const auto& row : table.rows) {
        for (int j = 0; j < ds.input_dim; ++j) ds.inputs.push_back(row[static_cast<std::size_t>(j)]);
        ds.labels.push_back(static_cast<int>(row.back()));
    }
    const auto meta_get = [&](const std::string& key) -> std::string {
        auto it = table.meta.find(key);
        return it == table.meta.end() ? "" : it->second;
    };
    const std::string classes = meta_get("classes");
    if (!classes.empty()) {
        ds.classes = std::stoi(classes);
    } else {
        int top = 0;
        for (int l : ds.labels) top = std::max(top, l);
        ds.classes = top + 1;
    }
    const std::string mode = meta_get("label_mode");
    ds.label_mode = mode.empty() ? "natural" : mode;
    ds.train_idx = split_indices(meta_get("train_idx"));
    ds.heldout_idx = split_indices(meta_get("heldout_idx"));
    if (ds.train_idx.empty() && ds.heldout_idx.empty()) {
        ds.train_idx.resize(static_cast<std::size_t>(ds.size()));
        for (int i = 0; i < ds.size(); ++i) ds.train_idx[static_cast<std::size_t>(i)] = i;
    }
    ds.validate();
    return ds;
}

std::vector<Vec> load_points_csv(const std::filesystem::path& path) {
    const CsvTable table = read_csv(path);
    if (table.columns.size() < 3 || table.columns[0] != "traj" || table.columns[1] != "t")
        throw ConfigError("'" + path.string() + "' is not a samples CSV");
    std::vector<Vec> points;
    points.reserve(table.rows.size());
    for (const auto& row : table.rows) points.emplace_back(row.begin() + 2, row.end());
    return points;
}

std::string read_file(const std::filesystem::path& path) {
    auto in = open_in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    auto out = open_out(path);
    out << content;
}

} // namespace flatlab
