app_name = "rdv_swarm"
app_title = "RDV Swarm"
app_publisher = "rdv_swarm contributors"
app_description = "Random Descending Velocity inertia-weight PSO, PSO-trained lag forecasters and experiments"
app_license = "mit"

# Inertia weight strategies
# ------------------------------
# CLI name -> strategy class

inertia_strategies = {
	"constant": "rdv_swarm.swarm.inertia_rdv.inertia_rdv.ConstantInertia",
	"linear": "rdv_swarm.swarm.inertia_rdv.inertia_rdv.LinearDecreasingInertia",
	"random": "rdv_swarm.swarm.inertia_rdv.inertia_rdv.RandomInertia",
	"rdv": "rdv_swarm.swarm.inertia_rdv.inertia_rdv.RdvInertia",
}

# Benchmark objectives
# ------------------------------
# name -> (function, minimum dimension)

benchmark_functions = {
	"sphere": ("rdv_swarm.evaluation.experiments.experiments.sphere", 1),
	"rastrigin": ("rdv_swarm.evaluation.experiments.experiments.rastrigin", 1),
	"rosenbrock": ("rdv_swarm.evaluation.experiments.experiments.rosenbrock", 2),
}
