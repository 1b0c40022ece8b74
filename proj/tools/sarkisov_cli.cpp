#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include <sarkisov/factor.hpp>

namespace {

using namespace sarkisov;

/* Exit-code families: 0 success, 1 failed verification, 2 instance or file
   errors, 3 ray-search failures, 4 iteration cap, 5 internal invariants. */
int exit_code_for(errc k) {
  switch (k) {
    case errc::ray_not_found:
    case errc::no_crepant_at_depth_zero:
      return 3;
    case errc::iteration_cap_exceeded:
      return 4;
    case errc::internal_invariant_violation:
      return 5;
    default:
      return 2;
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  check(in.good(), errc::schema_error, "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  check(out.good(), errc::schema_error, "cannot write '" + path + "'");
  out << text;
}

Rat parse_rat_arg(const std::string& s) {
  try {
    Rat r(s);
    r.canonicalize();
    check(r.get_den() > 0, errc::schema_error, "rational needs a positive denominator");
    return r;
  } catch (const std::invalid_argument&) {
    fail(errc::schema_error, "cannot parse rational '" + s + "' (use p or p/q)");
  }
}

struct Overrides {
  std::string mode;
  std::string epsilon;
  int search_bound = 0;
  long max_links = 0;

  void attach(CLI::App& cmd) {
    cmd.add_option("--mode", mode, "run mode: genuine, klt or wklt");
    cmd.add_option("--epsilon", epsilon, "boundary weight as p or p/q");
    cmd.add_option("--search-bound", search_bound,
                   "depth bound of the lattice ray search (log modes)");
    cmd.add_option("--max-links", max_links, "cap on the number of links");
  }

  void apply(InstanceData& inst) const {
    if (!mode.empty()) inst.mode = parse_mode(mode);
    if (!epsilon.empty()) inst.epsilon = parse_rat_arg(epsilon);
    if (search_bound > 0) inst.config.search_bound = search_bound;
    if (max_links > 0) inst.config.iteration_cap = max_links;
  }
};

std::string dot_of(const SarkisovCertificate& cert) {
  auto node = [](BaseType b, const SarkisovDegree& d) {
    return std::string(b == BaseType::point ? "POINT" : "CURVE") + "\\n" + d.str();
  };
  std::ostringstream out;
  out << "digraph sarkisov {\n  rankdir=LR;\n  node [shape=box];\n";
  for (std::size_t i = 0; i < cert.links.size(); ++i)
    out << "  s" << i << " [label=\""
        << node(cert.links[i].base_before, cert.links[i].degree_before) << "\"];\n";
  out << "  s" << cert.links.size() << " [label=\""
      << node(cert.final.base, cert.final.degree) << "\"];\n";
  for (std::size_t i = 0; i < cert.links.size(); ++i)
    out << "  s" << i << " -> s" << i + 1 << " [label=\""
        << link_type_name(cert.links[i].link_type) << "\"];\n";
  out << "}\n";
  return out.str();
}

int cmd_gen(const std::string& kind, const std::vector<std::int64_t>& args,
            const Overrides& ov, const std::string& out_path) {
  InstanceData inst;
  if (kind == "cremona") {
    check(args.empty(), errc::schema_error, "cremona takes no arguments");
    inst = gen_cremona();
  } else if (kind == "dejonquieres") {
    check(args.size() == 1, errc::schema_error, "dejonquieres takes one argument: the degree");
    inst = gen_dejonquieres(static_cast<int>(args[0]));
  } else if (kind == "random") {
    check(args.size() == 2, errc::schema_error,
          "random takes two arguments: points and seed");
    inst = gen_random(static_cast<int>(args[0]), static_cast<std::uint64_t>(args[1]));
  } else {
    fail(errc::schema_error, "unknown generator '" + kind +
                                 "' (expected cremona, dejonquieres or random)");
  }
  ov.apply(inst);
  build_instance(inst);  // reject invalid overrides before writing
  write_output(out_path, save_instance(inst));
  return 0;
}

int cmd_factor(const std::string& in_path, const Overrides& ov,
               const std::string& out_path, const std::string& dot_path) {
  InstanceData inst = load_instance(read_file(in_path));
  ov.apply(inst);
  const FactorResult fr = factor_instance(inst);
  write_output(out_path, emit_certificate(fr.certificate));
  if (!dot_path.empty()) write_output(dot_path, dot_of(fr.certificate));
  std::cerr << "factored: " << fr.certificate.links.size() << " links, final degree "
            << fr.certificate.final.degree.str() << "\n";
  return 0;
}

int cmd_verify(const std::string& in_path) {
  const SarkisovCertificate cert = load_certificate(read_file(in_path));
  const VerifyResult v = verify_certificate(cert);
  if (!v.ok) {
    std::cout << "FAIL: " << v.message << "\n";
    return 1;
  }
  std::cout << "OK: " << cert.links.size() << " links, final degree "
            << cert.final.degree.str() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact Sarkisov factorization of birational surface maps"};
  app.require_subcommand(1);

  auto* gen = app.add_subcommand("gen", "generate an instance file");
  std::string gen_kind;
  std::vector<std::int64_t> gen_args;
  std::string gen_out;
  Overrides gen_ov;
  gen->add_option("kind", gen_kind, "cremona | dejonquieres <d> | random <points> <seed>")
      ->required();
  gen->add_option("args", gen_args, "generator arguments");
  gen->add_option("--out", gen_out, "output path (default: stdout)");
  gen_ov.attach(*gen);

  auto* fac = app.add_subcommand("factor", "factor an instance into links");
  std::string fac_in, fac_out, fac_dot;
  Overrides fac_ov;
  fac->add_option("instance", fac_in, "instance file")->required();
  fac->add_option("--out", fac_out, "certificate path (default: stdout)");
  fac->add_option("--dot", fac_dot, "write the link chain as a DOT digraph");
  fac_ov.attach(*fac);

  auto* ver = app.add_subcommand("verify", "recheck a certificate from scratch");
  std::string ver_in;
  ver->add_option("certificate", ver_in, "certificate file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return cmd_gen(gen_kind, gen_args, gen_ov, gen_out);
    if (fac->parsed()) return cmd_factor(fac_in, fac_ov, fac_out, fac_dot);
    return cmd_verify(ver_in);
  } catch (const sarkisov::error& e) {
    std::cerr << e.what() << "\n";
    return exit_code_for(e.kind());
  }
}
