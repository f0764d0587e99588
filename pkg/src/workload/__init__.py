"""DNN models, quality families, services and workload schedules"""
