#include "qdpg/io.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace qdpg {

namespace fs = std::filesystem;

std::string fmt_double(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

CsvWriter::CsvWriter(const fs::path& file, const std::vector<std::string>& header)
    : out_(file, std::ios::binary), n_cols_(header.size()) {
    if (!out_) throw std::runtime_error("cannot open " + file.string() + " for writing");
    row(header);
}

void CsvWriter::row(const std::vector<std::string>& cells) {
    if (cells.size() != n_cols_) throw std::invalid_argument("CsvWriter: column count mismatch");
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out_ << ',';
        out_ << cells[i];
    }
    out_ << '\n';
}

void dump_archive(const CvtArchive& archive, const fs::path& dir) {
    const int bd_dim = archive.bd_dim();
    std::vector<std::string> header{"cell_id"};
    for (int d = 0; d < bd_dim; ++d) header.push_back("centroid_" + std::to_string(d));
    for (int d = 0; d < bd_dim; ++d) header.push_back("bd_" + std::to_string(d));
    header.push_back("fitness");
    header.push_back("genotype_offset");

    CsvWriter csv(dir / "archive.csv", header);
    std::ofstream bin(dir / "genotypes.bin", std::ios::binary);
    if (!bin) throw std::runtime_error("cannot open genotypes.bin for writing");

    std::uint64_t offset = 0;
    for (const auto& [cell, elite] : archive.cells()) {
        std::vector<std::string> cells{std::to_string(cell)};
        for (int d = 0; d < bd_dim; ++d)
            cells.push_back(fmt_double(archive.centroids()[cell][d]));
        for (int d = 0; d < bd_dim; ++d) cells.push_back(fmt_double(elite.bd[d]));
        cells.push_back(fmt_double(elite.fitness));
        cells.push_back(std::to_string(offset));
        csv.row(cells);
        write_param_vector(bin, elite.genotype);
        offset += 8 * (1 + elite.genotype.size());
    }
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

} // namespace

CvtArchive load_archive(const fs::path& dir, std::vector<BdPoint> centroids) {
    std::ifstream csv(dir / "archive.csv");
    if (!csv) throw std::runtime_error("cannot open " + (dir / "archive.csv").string());
    std::ifstream bin(dir / "genotypes.bin", std::ios::binary);
    if (!bin) throw std::runtime_error("cannot open " + (dir / "genotypes.bin").string());

    CvtArchive archive(std::move(centroids));
    const int bd_dim = archive.bd_dim();
    std::string line;
    std::getline(csv, line); // header
    while (std::getline(csv, line)) {
        if (line.empty()) continue;
        const auto cells = split_csv_line(line);
        if (static_cast<int>(cells.size()) != 2 * bd_dim + 3)
            throw std::runtime_error("archive.csv: malformed row '" + line + "'");
        BdPoint bd(bd_dim);
        for (int d = 0; d < bd_dim; ++d) bd[d] = std::stod(cells[1 + bd_dim + d]);
        const double fitness = std::stod(cells[1 + 2 * bd_dim]);
        bin.seekg(static_cast<std::streamoff>(std::stoull(cells.back())));
        const ParamVector genotype = read_param_vector(bin);
        archive.try_add(genotype, fitness, bd, 0);
    }
    return archive;
}

void write_centroids(const fs::path& file, const std::vector<BdPoint>& centroids) {
    const int bd_dim = static_cast<int>(centroids.front().size());
    std::vector<std::string> header{"cell_id"};
    for (int d = 0; d < bd_dim; ++d) header.push_back("c_" + std::to_string(d));
    CsvWriter csv(file, header);
    for (std::size_t i = 0; i < centroids.size(); ++i) {
        std::vector<std::string> cells{std::to_string(i)};
        for (double c : centroids[i]) cells.push_back(fmt_double(c));
        csv.row(cells);
    }
}

std::vector<BdPoint> read_centroids(const fs::path& file) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot open " + file.string());
    std::vector<BdPoint> centroids;
    std::string line;
    std::getline(in, line); // header
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cells = split_csv_line(line);
        BdPoint c;
        for (std::size_t i = 1; i < cells.size(); ++i) c.push_back(std::stod(cells[i]));
        centroids.push_back(std::move(c));
    }
    if (centroids.empty()) throw std::runtime_error(file.string() + ": no centroids");
    return centroids;
}

void write_metrics_csv(const fs::path& file, const std::vector<RunRecord>& records) {
    CsvWriter csv(file, {"generation", "evaluations", "qd_score", "coverage", "max_fitness"});
    for (const auto& r : records)
        csv.row({std::to_string(r.generation), std::to_string(r.evaluations),
                 fmt_double(r.qd_score), fmt_double(r.coverage), fmt_double(r.max_fitness)});
}

void write_operators_csv(const fs::path& file, const std::vector<RunRecord>& records) {
    CsvWriter csv(file, {"generation", "op", "additions"});
    for (const auto& r : records) {
        csv.row({std::to_string(r.generation), "init", std::to_string(r.added_init)});
        csv.row({std::to_string(r.generation), "ga", std::to_string(r.added_ga)});
        csv.row({std::to_string(r.generation), "pg", std::to_string(r.added_pg)});
        csv.row({std::to_string(r.generation), "greedy", std::to_string(r.added_greedy)});
    }
}

void write_critic_log_csv(const fs::path& file, const std::vector<CriticLogEntry>& log) {
    CsvWriter csv(file, {"step", "loss"});
    for (const auto& e : log) csv.row({std::to_string(e.step), fmt_double(e.loss)});
}

std::uint64_t fnv1a_file(const fs::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw std::runtime_error("cannot hash " + file.string());
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char buf[1 << 14];
    while (in) {
        in.read(buf, sizeof buf);
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ULL;
        }
    }
    return h;
}

void write_manifest(const fs::path& dir, const std::vector<std::string>& rel_files, bool complete,
                    const std::string& error) {
    std::vector<std::string> files = rel_files;
    std::sort(files.begin(), files.end());
    std::ofstream out(dir / "manifest.txt", std::ios::binary);
    if (!out) throw std::runtime_error("cannot open manifest.txt for writing");
    out << "status=" << (complete ? "complete" : "partial") << '\n';
    if (!error.empty()) out << "error=" << error << '\n';
    char hex[17];
    for (const auto& f : files) {
        const fs::path p = dir / f;
        if (!fs::exists(p)) continue;
        std::snprintf(hex, sizeof hex, "%016llx",
                      static_cast<unsigned long long>(fnv1a_file(p)));
        out << f << ' ' << hex << ' ' << fs::file_size(p) << '\n';
    }
}

double quantile(std::vector<double> values, double q) {
    if (values.empty()) throw std::invalid_argument("quantile: empty sample");
    std::sort(values.begin(), values.end());
    const double pos = q * static_cast<double>(values.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    if (lo + 1 >= values.size()) return values.back();
    const double frac = pos - static_cast<double>(lo);
    return values[lo] + frac * (values[lo + 1] - values[lo]);
}

} // namespace qdpg
