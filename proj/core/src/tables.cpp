#include "shimura/tables.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

namespace shimura {

std::string default_golden_path() {
    if (const char* env = std::getenv("SHIMURA_GOLDEN_PATH"); env && *env)
        return env;
#ifdef SHIMURA_SOURCE_DATA_DIR
    return std::string(SHIMURA_SOURCE_DATA_DIR) + "/shimura_curves.csv";
#else
    return "shimura_curves.csv";
#endif
}

namespace {

// field separator is ',' outside parentheses; signature strings keep theirs
std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    int depth = 0;
    for (char c : line) {
        if (c == '(') ++depth;
        if (c == ')') --depth;
        if (c == ',' && depth == 0) { out.push_back(cur); cur.clear(); }
        else if (!isspace(static_cast<unsigned char>(c))) cur += c;
    }
    out.push_back(cur);
    return out;
}

} // namespace

std::vector<GoldenRow> parse_tables(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path);
    std::vector<GoldenRow> rows;
    std::string line;
    size_t lineno = 0;
    bool header = true;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        if (header) {
            header = false;
            if (line.rfind("degree,", 0) == 0) continue;
        }
        auto f = split_csv(line);
        if (f.size() != 8)
            throw ParseError(path + ":" + std::to_string(lineno) +
                             ": expected 8 fields, got " + std::to_string(f.size()));
        GoldenRow r;
        try {
            r.degree = std::stoi(f[0]);
            r.d_F = std::stoll(f[1]);
            r.field_index = std::stoi(f[2]);
            r.D = std::stoll(f[3]);
            r.N = std::stoll(f[4]);
            r.label = f[5];
            r.signature = f[6];
            r.genus = std::stoi(f[7]);
        } catch (const std::exception&) {
            throw ParseError(path + ":" + std::to_string(lineno) + ": bad field");
        }
        Signature sig = parse_signature(r.signature);
        if (sig.genus != r.genus)
            throw ParseError(path + ":" + std::to_string(lineno) +
                             ": genus column disagrees with the signature");
        if (render_signature(sig) != r.signature)
            throw ParseError(path + ":" + std::to_string(lineno) +
                             ": signature not in canonical form");
        rows.push_back(std::move(r));
    }
    if (rows.size() != 858)
        throw CountMismatch("expected 858 rows, parsed " + std::to_string(rows.size()));
    return rows;
}

std::string render_row(const GoldenRow& r) {
    std::ostringstream os;
    os << r.degree << "," << r.d_F << "," << r.field_index << "," << r.D << ","
       << r.N << "," << r.label << "," << r.signature << "," << r.genus;
    return os.str();
}

GoldenRow golden_of_record(const CurveRecord& rec, int degree) {
    GoldenRow r;
    r.degree = degree;
    r.d_F = rec.d_F;
    r.field_index = 0;
    r.D = rec.D.norm;
    r.N = rec.N.norm;
    r.label = rec.label;
    r.signature = render_signature(rec.sig);
    r.genus = static_cast<int>(rec.sig.genus);
    return r;
}

DiffReport verify(const std::vector<CurveRecord>& computed,
                  const std::vector<GoldenRow>& golden, int degree) {
    auto key = [](const GoldenRow& r) {
        return std::make_tuple(r.d_F, r.D, r.N, r.label, r.signature);
    };
    std::vector<GoldenRow> want, got;
    for (const GoldenRow& r : golden)
        if (r.degree == degree) want.push_back(r);
    for (const CurveRecord& rec : computed) got.push_back(golden_of_record(rec, degree));
    auto cmp = [&](const GoldenRow& a, const GoldenRow& b) { return key(a) < key(b); };
    std::sort(want.begin(), want.end(), cmp);
    std::sort(got.begin(), got.end(), cmp);
    DiffReport rep;
    std::set_difference(want.begin(), want.end(), got.begin(), got.end(),
                        std::back_inserter(rep.missing), cmp);
    std::set_difference(got.begin(), got.end(), want.begin(), want.end(),
                        std::back_inserter(rep.extra), cmp);
    return rep;
}

std::string DiffReport::text() const {
    std::ostringstream os;
    if (empty()) {
        os << "verification passed: no differences\n";
        return os.str();
    }
    os << "verification failed: " << missing.size() << " missing, " << extra.size()
       << " extra\n";
    for (auto& r : missing) os << "  missing: " << render_row(r) << "\n";
    for (auto& r : extra) os << "  extra:   " << render_row(r) << "\n";
    return os.str();
}

std::string DiffReport::json() const {
    auto row_json = [](const GoldenRow& r) {
        std::ostringstream os;
        os << "{\"degree\":" << r.degree << ",\"d_F\":" << r.d_F << ",\"D\":" << r.D
           << ",\"N\":" << r.N << ",\"label\":\"" << r.label << "\",\"signature\":\""
           << r.signature << "\",\"genus\":" << r.genus << "}";
        return os.str();
    };
    std::ostringstream os;
    os << "{\"missing\":[";
    for (size_t i = 0; i < missing.size(); ++i)
        os << (i ? "," : "") << row_json(missing[i]);
    os << "],\"extra\":[";
    for (size_t i = 0; i < extra.size(); ++i)
        os << (i ? "," : "") << row_json(extra[i]);
    os << "],\"pass\":" << (empty() ? "true" : "false") << "}";
    return os.str();
}

std::vector<GoldenRow> lookup(const std::vector<GoldenRow>& golden, Int d_F, Int D,
                              Int N, const std::optional<std::string>& label) {
    std::vector<GoldenRow> out;
    for (const GoldenRow& r : golden) {
        if (r.d_F != d_F || r.D != D || r.N != N) continue;
        if (label && r.label != *label) continue;
        out.push_back(r);
    }
    if (out.empty()) throw NotFound("no row (" + std::to_string(d_F) + "," +
                                    std::to_string(D) + "," + std::to_string(N) + ")");
    return out;
}

} // namespace shimura
