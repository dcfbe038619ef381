// Python bindings for the beamspace library: channel math, power policies,
// training plans, outage analytics, stream-sync planning and the experiment
// harness. Span-taking functions are wrapped to accept lists/vectors.

#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <vector>

#include "beamspace/channel.hpp"
#include "beamspace/harness.hpp"
#include "beamspace/power.hpp"
#include "beamspace/simkernel.hpp"
#include "beamspace/sync.hpp"
#include "beamspace/training.hpp"

namespace py = pybind11;
using namespace beamspace;

PYBIND11_MODULE(_core, m) {
  m.doc() = "Beamspace multi-beam link simulation and analysis";

  // ---- channel -----------------------------------------------------------
  py::enum_<channel::PathKind>(m, "PathKind")
      .value("Los", channel::PathKind::Los)
      .value("Nlos", channel::PathKind::Nlos);

  py::class_<channel::RadioConstants>(m, "RadioConstants")
      .def(py::init<>())
      .def_readwrite("fc_ghz", &channel::RadioConstants::fc_ghz)
      .def_readwrite("bandwidth_hz", &channel::RadioConstants::bandwidth_hz)
      .def_readwrite("nf_db", &channel::RadioConstants::nf_db)
      .def_readwrite("a_los", &channel::RadioConstants::a_los)
      .def_readwrite("a_nlos", &channel::RadioConstants::a_nlos)
      .def_readwrite("n_los", &channel::RadioConstants::n_los)
      .def_readwrite("n_nlos", &channel::RadioConstants::n_nlos)
      .def_readwrite("z", &channel::RadioConstants::z)
      .def_readwrite("beta_per_m", &channel::RadioConstants::beta_per_m);

  py::class_<channel::PathGeometry>(m, "PathGeometry")
      .def(py::init<>())
      .def_readwrite("kind", &channel::PathGeometry::kind)
      .def_readwrite("theta_t_rad", &channel::PathGeometry::theta_t_rad)
      .def_readwrite("theta_r_rad", &channel::PathGeometry::theta_r_rad)
      .def_readwrite("r_los_m", &channel::PathGeometry::r_los_m);

  py::class_<channel::BeamPair>(m, "BeamPair")
      .def(py::init<>())
      .def_readwrite("id", &channel::BeamPair::id)
      .def_readwrite("geometry", &channel::BeamPair::geometry)
      .def_readwrite("xi_t_rad", &channel::BeamPair::xi_t_rad)
      .def_readwrite("xi_r_rad", &channel::BeamPair::xi_r_rad);

  py::class_<channel::ActiveBeam>(m, "ActiveBeam")
      .def(py::init<>())
      .def_readwrite("pair", &channel::ActiveBeam::pair)
      .def_readwrite("pt_dbm", &channel::ActiveBeam::pt_dbm);

  py::class_<channel::LinkBudget>(m, "LinkBudget")
      .def_readonly("pt_dbm", &channel::LinkBudget::pt_dbm)
      .def_readonly("gt_db", &channel::LinkBudget::gt_db)
      .def_readonly("gr_db", &channel::LinkBudget::gr_db)
      .def_readonly("loss_db", &channel::LinkBudget::loss_db)
      .def_readonly("noise_dbm", &channel::LinkBudget::noise_dbm)
      .def_readonly("interference_mw", &channel::LinkBudget::interference_mw)
      .def_readonly("sinr_db", &channel::LinkBudget::sinr_db);

  py::class_<channel::Scenario>(m, "Scenario")
      .def(py::init<>())
      .def_readwrite("radio", &channel::Scenario::radio)
      .def_readwrite("paths", &channel::Scenario::paths)
      .def_readwrite("xi_t_rad", &channel::Scenario::xi_t_rad)
      .def_readwrite("xi_r_rad", &channel::Scenario::xi_r_rad)
      .def_readwrite("max_tx_beams", &channel::Scenario::max_tx_beams)
      .def_readwrite("max_rx_beams", &channel::Scenario::max_rx_beams)
      .def_readwrite("tx_sectors", &channel::Scenario::tx_sectors)
      .def_readwrite("rx_sectors", &channel::Scenario::rx_sectors);

  m.def("deg_to_rad", &channel::deg_to_rad, py::arg("deg"));
  m.def("rad_to_deg", &channel::rad_to_deg, py::arg("rad"));
  m.def("dbm_to_mw", &channel::dbm_to_mw, py::arg("dbm"));
  m.def("mw_to_dbm", &channel::mw_to_dbm, py::arg("mw"));
  m.def("db_to_linear", &channel::db_to_linear, py::arg("db"));
  m.def("linear_to_db", &channel::linear_to_db, py::arg("lin"));
  m.def("path_distance_m", &channel::path_distance_m, py::arg("geometry"));
  m.def("path_loss_db", &channel::path_loss_db, py::arg("constants"),
        py::arg("kind"), py::arg("r_m"));
  m.def("friis_path_loss_db", &channel::friis_path_loss_db,
        py::arg("constants"), py::arg("r_m"));
  m.def("main_lobe_gain", &channel::main_lobe_gain, py::arg("xi_rad"),
        py::arg("z"));
  m.def("noise_power_dbm", &channel::noise_power_dbm, py::arg("constants"));
  m.def("snr_db", &channel::snr_db, py::arg("pair"), py::arg("pt_dbm"),
        py::arg("constants"));
  m.def(
      "sinr_db",
      [](std::size_t index, const std::vector<channel::ActiveBeam>& active,
         const channel::RadioConstants& k) {
        return channel::sinr_db(index, active, k);
      },
      py::arg("index"), py::arg("active"), py::arg("constants"));
  m.def(
      "link_budget",
      [](std::size_t index, const std::vector<channel::ActiveBeam>& active,
         const channel::RadioConstants& k) {
        return channel::link_budget(index, active, k);
      },
      py::arg("index"), py::arg("active"), py::arg("constants"));
  m.def("link_rate_bps", &channel::link_rate_bps, py::arg("bandwidth_hz"),
        py::arg("sinr_db"));

  // ---- power allocation ---------------------------------------------------
  py::enum_<power::Policy>(m, "Policy")
      .value("Ppa", power::Policy::Ppa)
      .value("Apa", power::Policy::Apa)
      .value("Oracle", power::Policy::Oracle);

  py::class_<power::PowerBudget>(m, "PowerBudget")
      .def(py::init<>())
      .def_readwrite("p_max_dbm", &power::PowerBudget::p_max_dbm)
      .def_readwrite("p_total_max_dbm", &power::PowerBudget::p_total_max_dbm)
      .def_readwrite("n_max", &power::PowerBudget::n_max)
      .def_readwrite("eta_db", &power::PowerBudget::eta_db);

  py::class_<power::BeamwidthBounds>(m, "BeamwidthBounds")
      .def(py::init<>())
      .def_readwrite("xi_t_min_rad", &power::BeamwidthBounds::xi_t_min_rad)
      .def_readwrite("xi_t_max_rad", &power::BeamwidthBounds::xi_t_max_rad)
      .def_readwrite("xi_r_min_rad", &power::BeamwidthBounds::xi_r_min_rad)
      .def_readwrite("xi_r_max_rad", &power::BeamwidthBounds::xi_r_max_rad);

  py::class_<power::AllocatedLink>(m, "AllocatedLink")
      .def_readonly("pair_id", &power::AllocatedLink::pair_id)
      .def_readonly("pt_mw", &power::AllocatedLink::pt_mw)
      .def_readonly("snr_db", &power::AllocatedLink::snr_db)
      .def_readonly("rate_bps", &power::AllocatedLink::rate_bps);

  py::class_<power::Allocation>(m, "Allocation")
      .def_readonly("policy", &power::Allocation::policy)
      .def_readonly("links", &power::Allocation::links)
      .def_readonly("rate_bps", &power::Allocation::rate_bps)
      .def_readonly("feasible", &power::Allocation::feasible);

  py::class_<power::LinkOptimum>(m, "LinkOptimum")
      .def_readonly("pt_mw", &power::LinkOptimum::pt_mw)
      .def_readonly("xi_t_rad", &power::LinkOptimum::xi_t_rad)
      .def_readonly("xi_r_rad", &power::LinkOptimum::xi_r_rad)
      .def_readonly("snr_db", &power::LinkOptimum::snr_db)
      .def_readonly("rate_bps", &power::LinkOptimum::rate_bps);

  py::class_<power::PolicyComparison>(m, "PolicyComparison")
      .def_readonly("ppa", &power::PolicyComparison::ppa)
      .def_readonly("apa", &power::PolicyComparison::apa)
      .def_readonly("equal_split_regime",
                    &power::PolicyComparison::equal_split_regime)
      .def_readonly("identical", &power::PolicyComparison::identical);

  m.def("pencil_snr_linear", &power::pencil_snr_linear, py::arg("pt_mw"),
        py::arg("loss_db"), py::arg("bounds"), py::arg("constants"));
  m.def("link_optimum", &power::link_optimum, py::arg("pair"),
        py::arg("budget"), py::arg("bounds"), py::arg("constants"));
  m.def(
      "ppa_allocate",
      [](const std::vector<channel::BeamPair>& pairs,
         const power::PowerBudget& budget, const power::BeamwidthBounds& bounds,
         const channel::RadioConstants& k) {
        return power::ppa_allocate(pairs, budget, bounds, k);
      },
      py::arg("pairs"), py::arg("budget"), py::arg("bounds"),
      py::arg("constants"));
  m.def(
      "apa_allocate",
      [](const std::vector<channel::BeamPair>& pairs,
         const power::PowerBudget& budget, const power::BeamwidthBounds& bounds,
         const channel::RadioConstants& k) {
        return power::apa_allocate(pairs, budget, bounds, k);
      },
      py::arg("pairs"), py::arg("budget"), py::arg("bounds"),
      py::arg("constants"));
  m.def(
      "oracle_allocate",
      [](const std::vector<channel::BeamPair>& pairs,
         const power::PowerBudget& budget, const power::BeamwidthBounds& bounds,
         const channel::RadioConstants& k, int grid_steps, int max_pairs) {
        power::OracleOptions opts;
        opts.grid_steps = grid_steps;
        opts.max_pairs = max_pairs;
        return power::oracle_allocate(pairs, budget, bounds, k, opts);
      },
      py::arg("pairs"), py::arg("budget"), py::arg("bounds"),
      py::arg("constants"), py::arg("grid_steps") = 64,
      py::arg("max_pairs") = 6);
  m.def(
      "compare_policies",
      [](const std::vector<channel::BeamPair>& pairs,
         const power::PowerBudget& budget, const power::BeamwidthBounds& bounds,
         const channel::RadioConstants& k) {
        return power::compare_policies(pairs, budget, bounds, k);
      },
      py::arg("pairs"), py::arg("budget"), py::arg("bounds"),
      py::arg("constants"));

  // ---- beam training -------------------------------------------------------
  py::enum_<training::Side>(m, "Side")
      .value("Mtx", training::Side::Mtx)
      .value("Mrx", training::Side::Mrx);

  py::class_<training::SectorGrid>(m, "SectorGrid")
      .def(py::init<>())
      .def_readwrite("side", &training::SectorGrid::side)
      .def_readwrite("sectors", &training::SectorGrid::sectors)
      .def_readwrite("span_rad", &training::SectorGrid::span_rad);

  py::class_<training::SweepPlan>(m, "SweepPlan")
      .def_readonly("sectors", &training::SweepPlan::sectors)
      .def_readonly("beams_per_round", &training::SweepPlan::beams_per_round)
      .def_readonly("rounds", &training::SweepPlan::rounds)
      .def_readonly("layout", &training::SweepPlan::layout);

  py::class_<training::Candidate>(m, "Candidate")
      .def_readonly("beam_id", &training::Candidate::beam_id)
      .def_readonly("snr_db", &training::Candidate::snr_db)
      .def_readonly("path_index", &training::Candidate::path_index);

  py::class_<training::CandidateSet>(m, "CandidateSet")
      .def(py::init<>())
      .def_readwrite("side", &training::CandidateSet::side)
      .def_readwrite("entries", &training::CandidateSet::entries);

  py::class_<training::TrainingParams>(m, "TrainingParams")
      .def(py::init<>())
      .def_readwrite("pt_dbm", &training::TrainingParams::pt_dbm)
      .def_readwrite("eta_db", &training::TrainingParams::eta_db);

  py::class_<training::PairEntry>(m, "PairEntry")
      .def_readonly("tx_beam", &training::PairEntry::tx_beam)
      .def_readonly("rx_beam", &training::PairEntry::rx_beam)
      .def_readonly("snr_db", &training::PairEntry::snr_db)
      .def_readonly("path_index", &training::PairEntry::path_index);

  py::class_<training::PairSet>(m, "PairSet")
      .def_readonly("pairs", &training::PairSet::pairs)
      .def_readonly("eta_db", &training::PairSet::eta_db)
      .def_readonly("tests_performed", &training::PairSet::tests_performed);

  py::class_<training::SelectionResult>(m, "SelectionResult")
      .def_readonly("chosen", &training::SelectionResult::chosen)
      .def_readonly("allocation", &training::SelectionResult::allocation);

  m.def("make_grid", &training::make_grid, py::arg("scenario"), py::arg("side"));
  m.def("sector_index", &training::sector_index, py::arg("grid"),
        py::arg("angle_rad"));
  m.def("plan_sweep", &training::plan_sweep, py::arg("sectors"),
        py::arg("max_concurrent"));
  m.def("run_training", &training::run_training, py::arg("scenario"),
        py::arg("side"), py::arg("params"));
  m.def(
      "beam_combining",
      [](const channel::Scenario& sc, const training::CandidateSet& tx,
         const training::CandidateSet& rx, double eta_db, double pt_dbm) {
        return training::beam_combining(sc, tx, rx, eta_db, pt_dbm);
      },
      py::arg("scenario"), py::arg("tx"), py::arg("rx"), py::arg("eta_db"),
      py::arg("pt_dbm"));
  m.def(
      "beam_combining_measured",
      [](const training::CandidateSet& tx, const training::CandidateSet& rx,
         double eta_db, const training::PairMeasure& measure) {
        return training::beam_combining(tx, rx, eta_db, measure);
      },
      py::arg("tx"), py::arg("rx"), py::arg("eta_db"), py::arg("measure"));
  m.def("combining_test_count", &training::combining_test_count,
        py::arg("n_tx"), py::arg("n_rx"));
  m.def("to_beam_pairs", &training::to_beam_pairs, py::arg("scenario"),
        py::arg("pair_set"));
  m.def(
      "select_combination",
      [](const std::vector<channel::BeamPair>& pairs,
         const power::PowerBudget& budget, const power::BeamwidthBounds& bounds,
         const channel::RadioConstants& k, power::Policy policy,
         int enumeration_cap) {
        return training::select_combination(pairs, budget, bounds, k, policy,
                                            enumeration_cap);
      },
      py::arg("pairs"), py::arg("budget"), py::arg("bounds"),
      py::arg("constants"), py::arg("policy"), py::arg("enumeration_cap") = 15);

  // ---- stream sync ----------------------------------------------------------
  py::class_<sync::SplitPlan>(m, "SplitPlan")
      .def(py::init<>())
      .def_readwrite("total_bytes", &sync::SplitPlan::total_bytes)
      .def_readwrite("shares", &sync::SplitPlan::shares)
      .def_readwrite("weights", &sync::SplitPlan::weights);

  py::class_<sync::CycleOutcome>(m, "CycleOutcome")
      .def(py::init<>())
      .def_readwrite("start_at", &sync::CycleOutcome::start_at)
      .def_readwrite("end_at", &sync::CycleOutcome::end_at)
      .def_readwrite("finish_at", &sync::CycleOutcome::finish_at)
      .def_readwrite("remainder_bytes", &sync::CycleOutcome::remainder_bytes)
      .def_readwrite("overrun", &sync::CycleOutcome::overrun)
      .def_readwrite("tau1", &sync::CycleOutcome::tau1)
      .def_readwrite("tau2", &sync::CycleOutcome::tau2)
      .def_readwrite("timer2_start", &sync::CycleOutcome::timer2_start)
      .def_readwrite("timer2_deadline", &sync::CycleOutcome::timer2_deadline);

  m.def(
      "split_stream",
      [](std::uint64_t total_bytes, const std::vector<double>& weights) {
        return sync::split_stream(total_bytes, weights);
      },
      py::arg("total_bytes"), py::arg("weights"));
  m.def("rebalance", &sync::rebalance, py::arg("prev"), py::arg("outcome"),
        py::arg("floor_fraction") = 0.01);

  // ---- experiment harness ----------------------------------------------------
  py::register_exception<harness::ConfigError>(m, "ConfigError");
  py::register_exception<harness::InfeasibleError>(m, "InfeasibleError");

  py::class_<sim::TraceEntry>(m, "TraceEntry")
      .def_readonly("at", &sim::TraceEntry::at)
      .def_readonly("actor", &sim::TraceEntry::actor)
      .def_readonly("kind", &sim::TraceEntry::kind)
      .def_readonly("details", &sim::TraceEntry::details);

  m.def(
      "format_trace",
      [](const std::vector<sim::TraceEntry>& trace) {
        return sim::format_trace(trace);
      },
      py::arg("trace"));

  py::class_<harness::ExperimentConfig>(m, "ExperimentConfig")
      .def(py::init<>())
      .def_readwrite("radio", &harness::ExperimentConfig::radio)
      .def_readwrite("budget", &harness::ExperimentConfig::budget)
      .def_readwrite("r_los_m", &harness::ExperimentConfig::r_los_m)
      .def_readwrite("xi_t_deg", &harness::ExperimentConfig::xi_t_deg)
      .def_readwrite("xi_r_deg", &harness::ExperimentConfig::xi_r_deg)
      .def_readwrite("theta_t_deg", &harness::ExperimentConfig::theta_t_deg)
      .def_readwrite("theta_r_deg", &harness::ExperimentConfig::theta_r_deg)
      .def_readwrite("eta_db_list", &harness::ExperimentConfig::eta_db_list)
      .def_readwrite("p_block_list", &harness::ExperimentConfig::p_block_list)
      .def_readwrite("n_list", &harness::ExperimentConfig::n_list)
      .def_readwrite("seed", &harness::ExperimentConfig::seed)
      .def_readwrite("trials", &harness::ExperimentConfig::trials)
      .def_readwrite("policy", &harness::ExperimentConfig::policy)
      .def_readwrite("tx_sectors", &harness::ExperimentConfig::tx_sectors)
      .def_readwrite("rx_sectors", &harness::ExperimentConfig::rx_sectors)
      .def_readwrite("train_eta_db", &harness::ExperimentConfig::train_eta_db);

  py::class_<harness::ResultRow>(m, "ResultRow")
      .def_readonly("experiment", &harness::ResultRow::experiment)
      .def_readonly("x_name", &harness::ResultRow::x_name)
      .def_readonly("x_value", &harness::ResultRow::x_value)
      .def_readonly("metric", &harness::ResultRow::metric)
      .def_readonly("value", &harness::ResultRow::value)
      .def_readonly("units", &harness::ResultRow::units);

  py::class_<harness::ExperimentResult>(m, "ExperimentResult")
      .def_readonly("name", &harness::ExperimentResult::name)
      .def_readonly("rows", &harness::ExperimentResult::rows)
      .def_readonly("trace", &harness::ExperimentResult::trace)
      .def_property_readonly("trace_text",
                             [](const harness::ExperimentResult& r) {
                               return sim::format_trace(r.trace);
                             });

  py::class_<harness::OutageEstimate>(m, "OutageEstimate")
      .def_readonly("estimate", &harness::OutageEstimate::estimate)
      .def_readonly("half_width", &harness::OutageEstimate::half_width);

  py::class_<harness::ValidationReport>(m, "ValidationReport")
      .def_readonly("instances", &harness::ValidationReport::instances)
      .def_readonly("oracle_below_policies",
                    &harness::ValidationReport::oracle_below_policies)
      .def_readonly("regime_cases", &harness::ValidationReport::regime_cases)
      .def_readonly("regime_mismatches",
                    &harness::ValidationReport::regime_mismatches)
      .def_readonly("max_shortfall_db",
                    &harness::ValidationReport::max_shortfall_db)
      .def_readonly("rows", &harness::ValidationReport::rows);

  m.def("default_config", &harness::default_config);
  m.def("parse_config", &harness::parse_config, py::arg("json_text"));
  m.def("load_config", &harness::load_config, py::arg("path"));
  m.def("make_scenario", &harness::make_scenario, py::arg("config"));
  m.def("format_double", &harness::format_double, py::arg("value"));
  m.def(
      "write_csv",
      [](const std::string& path, const std::vector<harness::ResultRow>& rows) {
        harness::write_csv(path, rows);
      },
      py::arg("path"), py::arg("rows"));
  m.def(
      "outage_analytic",
      [](const std::vector<double>& p_list) {
        return harness::outage_analytic(p_list);
      },
      py::arg("p_list"));
  m.def("outage_monte_carlo", &harness::outage_monte_carlo, py::arg("p"),
        py::arg("n"), py::arg("trials"), py::arg("seed"));
  m.def("run_rate_map", &harness::run_rate_map, py::arg("config"));
  m.def("run_rate_vs_eta", &harness::run_rate_vs_eta, py::arg("config"));
  m.def("run_outage", &harness::run_outage, py::arg("config"));
  m.def("run_training_demo", &harness::run_training_demo, py::arg("config"));
  m.def("run_tracking_scenario", &harness::run_tracking_scenario,
        py::arg("config"));
  m.def("run_sync_demo", &harness::run_sync_demo, py::arg("config"));
  m.def("run_validation", &harness::run_validation, py::arg("config"),
        py::arg("instances"));
}
