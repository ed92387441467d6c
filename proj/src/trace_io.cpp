#include <fstream>
#include <sstream>

#include <json.hpp>

#include "fsasense/channel.hpp"

namespace fsasense {

using json = nlohmann::ordered_json;

void write_trace_csv(const CsiTrace& trace, const std::filesystem::path& csv_path) {
    std::ofstream out(csv_path);
    if (!out) throw Error("cannot write trace file: " + csv_path.string());
    out << "t,subcarrier_index,freq_hz,rx,real,imag\n";
    out.precision(17);
    for (std::size_t t = 0; t < trace.num_times(); ++t)
        for (std::size_t f = 0; f < trace.num_subcarriers(); ++f)
            for (int rx = 0; rx < 2; ++rx) {
                const cplx& v = trace.at(t, f, rx);
                out << trace.time_at(t) << "," << f << "," << trace.subcarrier_freqs()[f] << ","
                    << rx << "," << v.real() << "," << v.imag() << "\n";
            }
}

void write_trace_meta(const CsiTrace& trace, const std::filesystem::path& json_path) {
    json j;
    j["scenario_id"] = trace.meta().scenario_id;
    j["seed"] = trace.meta().seed;
    j["map_id"] = trace.meta().map_id;
    j["sample_rate_hz"] = trace.sample_rate();
    j["num_times"] = trace.num_times();
    j["subcarrier_freqs_hz"] = trace.subcarrier_freqs();
    std::ofstream out(json_path);
    if (!out) throw Error("cannot write trace metadata: " + json_path.string());
    out << j.dump(2) << "\n";
}

CsiTrace read_trace_csv(const std::filesystem::path& csv_path,
                        const std::filesystem::path& json_path) {
    std::ifstream meta_in(json_path);
    if (!meta_in) throw ParseError("cannot open trace metadata: " + json_path.string());
    json j;
    try {
        meta_in >> j;
    } catch (const json::parse_error& e) {
        throw ParseError("trace metadata: " + std::string(e.what()));
    }
    TraceMeta meta;
    meta.scenario_id = j.at("scenario_id").get<std::string>();
    meta.seed = j.at("seed").get<std::uint64_t>();
    meta.map_id = j.at("map_id").get<std::string>();
    double rate = j.at("sample_rate_hz").get<double>();
    std::size_t nt = j.at("num_times").get<std::size_t>();
    std::vector<double> freqs = j.at("subcarrier_freqs_hz").get<std::vector<double>>();

    CsiTrace trace(rate, std::move(freqs), nt, std::move(meta));

    std::ifstream in(csv_path);
    if (!in) throw ParseError("cannot open trace file: " + csv_path.string());
    std::string line;
    if (!std::getline(in, line) || line.rfind("t,subcarrier_index,freq_hz,rx,real,imag", 0) != 0)
        throw ParseError("trace CSV row 1: bad header");
    int row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string field;
        double vals[6];
        for (int i = 0; i < 6; ++i) {
            if (!std::getline(ss, field, ','))
                throw ParseError("trace CSV row " + std::to_string(row) + ": expected 6 columns");
            try {
                vals[i] = std::stod(field);
            } catch (const std::exception&) {
                throw ParseError("trace CSV row " + std::to_string(row) + ": malformed number");
            }
        }
        auto t = static_cast<std::size_t>(vals[0] * rate + 0.5);
        auto f = static_cast<std::size_t>(vals[1]);
        int rx = static_cast<int>(vals[3]);
        if (t >= trace.num_times() || f >= trace.num_subcarriers() || (rx != 0 && rx != 1))
            throw ParseError("trace CSV row " + std::to_string(row) + ": index out of range");
        trace.at(t, f, rx) = {vals[4], vals[5]};
    }
    return trace;
}

} // namespace fsasense
