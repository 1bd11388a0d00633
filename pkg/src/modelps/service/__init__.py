"""HTTP service, worker pool wiring, and first-boot seeding."""
