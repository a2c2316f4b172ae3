#include <CLI11.hpp>

#include <future>
#include <iostream>
#include <fstream>
#include <sstream>

#include "shimura/tables.hpp"

using namespace shimura;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitDiff = 1;
constexpr int kExitInput = 2;
constexpr int kExitInternal = 3;

struct CommonOpts {
    std::string calibration = "full";
    int unit_search_bound = 8;
    std::string override_path;
    EllipticConfig elliptic() const {
        EllipticConfig cfg;
        cfg.half_calibration = calibration == "half";
        return cfg;
    }
    CMConfig cm() const {
        CMConfig cfg;
        cfg.unit_search_bound = unit_search_bound;
        cfg.override_path = override_path;
        return cfg;
    }
};

void add_common(CLI::App* cmd, CommonOpts& common) {
    cmd->add_option("--calibration", common.calibration,
                    "elliptic-count prefactor: full = 1/h(F), half = 1/(2h(F))")
        ->check(CLI::IsMember({"full", "half"}));
    cmd->add_option("--unit-search-bound", common.unit_search_bound,
                    "exponent bound for the unit-index search")
        ->check(CLI::Range(0, 64));
    cmd->add_option("--override-file", common.override_path,
                    "unit-index override records, used only when the search is "
                    "inconclusive");
}

// all distinct table-row candidates for norms (D, N) over F
std::vector<CurveRecord> resolve_rows(const BaseField& F, CMCache& cache, Int D,
                                      Int N, const EllipticConfig& cfg) {
    std::vector<CurveRecord> rows;
    for (const Ideal& Di : ideals_of_norm(F, D)) {
        if (!Di.squarefree()) continue;
        if ((F.degree + Di.n_primes()) % 2 == 0) continue;
        for (const Ideal& Ni : ideals_of_norm(F, N)) {
            if (!coprime(Di, Ni)) continue;
            auto [cd, cn] = tau_canonical_pair(F, Di, Ni);
            if (!(cd == Di && cn == Ni)) continue;
            Signature sig = signature(cache, validate(F, Di, Ni), cfg);
            rows.push_back(CurveRecord{F.disc, Di, Ni, sig, ""});
        }
    }
    std::sort(rows.begin(), rows.end());
    assign_labels(F, rows);
    return rows;
}

std::string record_csv(const CurveRecord& r, int degree) {
    return render_row(golden_of_record(r, degree));
}

std::string record_json(const CurveRecord& r, int degree) {
    GoldenRow g = golden_of_record(r, degree);
    std::ostringstream os;
    os << "{\"degree\":" << g.degree << ",\"d_F\":" << g.d_F << ",\"D\":" << g.D
       << ",\"N\":" << g.N << ",\"label\":\"" << g.label << "\",\"signature\":\""
       << g.signature << "\",\"genus\":" << g.genus << ",\"area\":\""
       << r.sig.area.get_str() << "\"}";
    return os.str();
}

std::string record_text(const CurveRecord& r) {
    std::ostringstream os;
    os << r.d_F << "\t" << r.D.norm << "\t" << r.N.norm << "\t"
       << render_signature(r.sig) << "\tarea=" << r.sig.area.get_str();
    if (!r.label.empty()) os << "\t[" << r.label << "]";
    return os.str();
}

void emit_records(const std::vector<CurveRecord>& recs, int degree,
                  const std::string& format, std::ostream& out) {
    if (format == "csv") {
        out << "degree,d_F,field_index,D,N,ideal_label,signature,genus\n";
        for (auto& r : recs) out << record_csv(r, degree) << "\n";
    } else if (format == "json") {
        out << "[";
        for (size_t i = 0; i < recs.size(); ++i)
            out << (i ? ",\n " : "\n ") << record_json(recs[i], degree);
        out << "\n]\n";
    } else {
        for (auto& r : recs) out << record_text(r) << "\n";
    }
}

std::vector<CurveRecord> enumerate_fields(const std::vector<Int>& discs, int genus,
                                          const EnumerateOptions& opt,
                                          const CMConfig& cm, int jobs) {
    std::vector<CurveRecord> all;
    if (jobs <= 1) {
        for (Int d : discs) {
            BaseField F = make_field(d);
            CMCache cache(cm); // per-field cache, confined to this worker
            auto recs = enumerate_all(cache, F, genus, opt);
            all.insert(all.end(), recs.begin(), recs.end());
        }
    } else {
        std::vector<std::future<std::vector<CurveRecord>>> futs;
        std::atomic<size_t> next{0};
        auto worker = [&]() {
            std::vector<CurveRecord> mine;
            for (;;) {
                size_t i = next.fetch_add(1);
                if (i >= discs.size()) break;
                BaseField F = make_field(discs[i]);
                CMCache cache(cm);
                auto recs = enumerate_all(cache, F, genus, opt);
                mine.insert(mine.end(), recs.begin(), recs.end());
            }
            return mine;
        };
        for (int j = 0; j < jobs; ++j)
            futs.push_back(std::async(std::launch::async, worker));
        for (auto& f : futs) {
            auto part = f.get();
            all.insert(all.end(), part.begin(), part.end());
        }
    }
    std::sort(all.begin(), all.end()); // deterministic merge
    return all;
}

int cmd_signature(Int dF, Int D, Int N, const std::string& label, bool audit,
                  const CommonOpts& common) {
    BaseField F = make_field(dF);
    CMCache cache(common.cm());
    EllipticConfig cfg = common.elliptic();
    auto rows = resolve_rows(F, cache, D, N, cfg);
    if (rows.empty()) throw NotFound("no valid (D, N) pair with these norms");
    const CurveRecord* chosen = nullptr;
    if (rows.size() == 1) {
        chosen = &rows[0];
    } else {
        std::vector<std::string> labels;
        for (auto& r : rows) labels.push_back(r.label);
        if (label.empty()) {
            std::ostringstream os;
            os << "several inequivalent choices; pass --label with one of:";
            for (auto& l : labels) os << " " << l;
            throw AmbiguousIdeal(os.str());
        }
        for (auto& r : rows)
            if (r.label == label) chosen = &r;
        if (!chosen) throw NotFound("no row with label " + label);
    }
    const CurveRecord& r = *chosen;
    std::cout << "X_0^D(N) over d_F = " << dF << ": D = " << r.D.str()
              << ", N = " << r.N.str() << "\n";
    std::cout << "signature " << render_signature(r.sig) << "\n";
    std::cout << "area      " << r.sig.area.get_str() << "\n";
    std::cout << "genus     " << r.sig.genus << "\n";
    std::cout << "Phi(D) = " << phi_of(r.D) << ", Psi(N) = " << psi_of(r.N)
              << ", A_prim = " << F.a_prim.get_str() << "\n";
    if (audit) {
        for (int q : admissible_q(F)) {
            EllipticDetail det = elliptic_count_detail(cache, F, q, r.D, r.N, cfg);
            std::cout << "e_" << q << " = " << det.e_q
                      << "  (prefactor " << det.prefactor.get_str() << ")\n";
            for (auto& oc : det.orders) {
                std::cout << "  order cond=" << oc.cond.str() << " h(R)=" << oc.h_R
                          << " Q(R)=" << oc.Q_R << " [ZK*:R*]=" << oc.unit_index
                          << " term=" << oc.term.get_str() << "\n";
                for (auto& [P, e, m] : oc.local)
                    std::cout << "    m(P" << P.norm
                              << (P.split() ? "[" + std::to_string(P.root) + "]" : "")
                              << "^" << e << ") = " << m << "\n";
            }
        }
        if (F.is_rational() && r.D.is_unit())
            std::cout << "e_inf = " << cusp_count(r.N.norm) << "\n";
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Exact signatures and enumeration of Shimura curves X_0^D(N) "
                 "of genus at most 2 over Q and real quadratic fields"};
    app.require_subcommand(1);

    CommonOpts common;

    // signature
    auto* sig = app.add_subcommand("signature", "signature of one curve");
    Int s_dF = 1, s_D = 1, s_N = 1;
    std::string s_label;
    bool s_audit = false;
    sig->add_option("--dF", s_dF, "field discriminant (1 for Q)")->required();
    sig->add_option("--D", s_D, "norm of the quaternion discriminant")->required();
    sig->add_option("--N", s_N, "norm of the level")->required();
    sig->add_option("--label", s_label, "disambiguator for duplicate norms");
    sig->add_flag("--audit", s_audit, "print h(R), Q(R) and local embedding data");
    add_common(sig, common);

    // enumerate
    auto* en = app.add_subcommand("enumerate", "list all curves of genus <= cap");
    int e_degree = 1, e_genus = 2, e_jobs = 1;
    Int e_dF = 0;
    bool e_all = false, e_refine = false, e_nomodular = false;
    std::string e_format = "text", e_output;
    en->add_option("--degree", e_degree, "1 or 2")->check(CLI::IsMember({1, 2}));
    en->add_option("--genus", e_genus, "genus cap (0, 1 or 2)")
        ->check(CLI::IsMember({0, 1, 2}));
    en->add_option("--dF", e_dF, "one quadratic field discriminant");
    en->add_flag("--all-fields", e_all, "all degree-2 fields in the scan");
    en->add_option("--format", e_format, "text|csv|json")
        ->check(CLI::IsMember({"text", "csv", "json"}));
    en->add_option("--output", e_output, "write to file instead of stdout");
    en->add_option("--jobs", e_jobs, "parallel field workers")->check(CLI::Range(1, 64));
    en->add_flag("--refine", e_refine, "refined discriminant search");
    en->add_flag("--no-modular", e_nomodular, "omit D = (1) over Q");
    Int e_min_dF = 0, e_max_dF = 0;
    en->add_option("--min-dF", e_min_dF, "restrict --all-fields to d_F >= this");
    en->add_option("--max-dF", e_max_dF, "restrict --all-fields to d_F <= this");
    add_common(en, common);

    // verify
    auto* ver = app.add_subcommand("verify", "diff enumeration against the bundle");
    int v_degree = 1, v_jobs = 1;
    std::string v_golden, v_report;
    bool v_json = false;
    ver->add_option("--degree", v_degree, "1 or 2")->check(CLI::IsMember({1, 2}));
    ver->add_option("--golden", v_golden, "golden CSV path");
    ver->add_option("--report", v_report, "write the diff report to a file");
    ver->add_flag("--json", v_json, "emit the report as JSON");
    ver->add_option("--jobs", v_jobs, "parallel field workers")->check(CLI::Range(1, 64));

    // scan-fields
    auto* scan = app.add_subcommand("scan-fields", "real quadratic fields below the bound");
    int f_genus = 2;
    bool f_bound = false, f_list = false;
    scan->add_option("--genus", f_genus, "genus cap")->check(CLI::IsMember({0, 1, 2}));
    scan->add_flag("--show-bound", f_bound, "print the Selberg-Zograf bound");
    scan->add_flag("--list", f_list, "print every discriminant");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) ? kExitInput : kExitOk;
    }

    try {
        if (sig->parsed())
            return cmd_signature(s_dF, s_D, s_N, s_label, s_audit, common);

        if (en->parsed()) {
            EnumerateOptions opt;
            opt.elliptic = common.elliptic();
            opt.refine_discriminants = e_refine;
            opt.include_modular = !e_nomodular;
            std::vector<Int> discs;
            if (e_degree == 1) {
                discs = {1};
            } else if (e_dF > 0) {
                discs = {e_dF};
            } else if (e_all) {
                discs = field_scan(2).discs;
                if (e_min_dF > 0)
                    std::erase_if(discs, [&](Int d) { return d < e_min_dF; });
                if (e_max_dF > 0)
                    std::erase_if(discs, [&](Int d) { return d > e_max_dF; });
            } else {
                std::cerr << "error: pass --dF or --all-fields for degree 2\n";
                return kExitInput;
            }
            auto recs = enumerate_fields(discs, e_genus, opt, common.cm(), e_jobs);
            std::ofstream file;
            std::ostream* out = &std::cout;
            if (!e_output.empty()) {
                file.open(e_output);
                if (!file) throw Error("cannot open " + e_output);
                out = &file;
            }
            emit_records(recs, e_degree, e_format, *out);
            std::cout << (e_output.empty() ? "" : "wrote " + e_output + "\n");
            std::cerr << recs.size() << " curves\n";
            return kExitOk;
        }

        if (ver->parsed()) {
            auto golden = parse_tables(v_golden.empty() ? default_golden_path()
                                                        : v_golden);
            EnumerateOptions opt;
            std::vector<Int> discs =
                v_degree == 1 ? std::vector<Int>{1} : field_scan(2).discs;
            auto recs = enumerate_fields(discs, 2, opt, common.cm(), v_jobs);
            DiffReport rep = verify(recs, golden, v_degree);
            std::string text = v_json ? rep.json() : rep.text();
            if (!v_report.empty()) {
                std::ofstream f(v_report);
                f << text;
                std::cout << "report written to " << v_report << "\n";
            } else {
                std::cout << text;
            }
            return rep.empty() ? kExitOk : kExitDiff;
        }

        if (scan->parsed()) {
            FieldScan fs = field_scan(f_genus);
            if (f_bound)
                std::cout << "Selberg-Zograf root discriminant bound: "
                          << fs.bound << "\n";
            std::cout << fs.discs.size() << " fields, min " << fs.discs.front()
                      << ", max " << fs.discs.back() << "\n";
            if (f_genus == 2) {
                std::cout << "published row: 257 fields, min 5, max 849\n";
                if (fs.discs.back() != 849)
                    std::cout << "NOTE: recomputed maximum " << fs.discs.back()
                              << " differs from the published 849 (sqrt("
                              << fs.discs.back() << ") is below the bound)\n";
            }
            if (f_list)
                for (Int d : fs.discs) std::cout << d << "\n";
            return kExitOk;
        }
    } catch (const AmbiguousIdeal& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const NotFound& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const NonFundamentalDiscriminant& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const NotTotallyReal& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const NotSquarefree& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const NotCoprime& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const ParityViolation& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const CountMismatch& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const Error& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kExitInternal;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kExitInternal;
    }
    return kExitOk;
}
