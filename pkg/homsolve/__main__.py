from homsolve.main import app

app(prog_name="homsolve")
