import django.db.models.deletion
from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = [
    ]

    operations = [
        migrations.CreateModel(
            name='ExperimentRun',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('kind', models.CharField(choices=[('eval', 'Evaluación'), ('fraction', 'Ablación de soporte'), ('subjects', 'Ablación de sujetos'), ('epochs', 'Ablación de épocas')], max_length=20, verbose_name='Tipo de corrida')),
                ('scenario', models.CharField(choices=[('session', 'Adaptación de sesión'), ('subject', 'Adaptación de sujeto')], max_length=20, verbose_name='Escenario')),
                ('held_out', models.CharField(blank=True, help_text='Solo para adaptación de sujeto.', max_length=20, verbose_name='Sujeto excluido')),
                ('config', models.JSONField(verbose_name='Configuración')),
                ('config_hash', models.CharField(max_length=64, verbose_name='Hash de configuración')),
                ('corpus_hash', models.CharField(blank=True, max_length=64, verbose_name='Hash del corpus')),
                ('seeds', models.JSONField(default=list, verbose_name='Semillas')),
                ('results_dir', models.CharField(max_length=500, verbose_name='Carpeta de resultados')),
                ('fecha_registro', models.DateTimeField(auto_now_add=True, verbose_name='Fecha de registro')),
            ],
            options={
                'verbose_name': 'Corrida de experimento',
                'verbose_name_plural': 'Corridas de experimentos',
                'ordering': ['-fecha_registro'],
            },
        ),
        migrations.CreateModel(
            name='ResultCell',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('method', models.CharField(choices=[('NoPretrain3', 'Sin preentrenamiento (3 épocas)'), ('NoPretrainConverged', 'Sin preentrenamiento (convergido)'), ('ConvPretrain3', 'Preentrenamiento convencional (3 épocas)'), ('ConvPretrainConverged', 'Preentrenamiento convencional (convergido)'), ('MetaEMG', 'MetaEMG')], max_length=30, verbose_name='Método')),
                ('subject_id', models.CharField(max_length=20, verbose_name='Sujeto')),
                ('fraction', models.FloatField(blank=True, null=True, verbose_name='Fracción de soporte')),
                ('n_pretrain', models.PositiveSmallIntegerField(blank=True, null=True, verbose_name='Sujetos de preentrenamiento')),
                ('epochs', models.PositiveSmallIntegerField(blank=True, null=True, verbose_name='Épocas de ajuste')),
                ('accuracy', models.FloatField(verbose_name='Precisión media (%)')),
                ('std_over_seeds', models.FloatField(verbose_name='Desviación sobre semillas')),
                ('n_tasks', models.PositiveIntegerField(verbose_name='Tareas')),
                ('run', models.ForeignKey(on_delete=django.db.models.deletion.CASCADE, related_name='cells', to='harness.experimentrun', verbose_name='Corrida')),
            ],
            options={
                'verbose_name': 'Celda de resultados',
                'verbose_name_plural': 'Celdas de resultados',
                'ordering': ['run', 'method', 'subject_id'],
            },
        ),
        migrations.CreateModel(
            name='TaskResult',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('method', models.CharField(choices=[('NoPretrain3', 'Sin preentrenamiento (3 épocas)'), ('NoPretrainConverged', 'Sin preentrenamiento (convergido)'), ('ConvPretrain3', 'Preentrenamiento convencional (3 épocas)'), ('ConvPretrainConverged', 'Preentrenamiento convencional (convergido)'), ('MetaEMG', 'MetaEMG')], max_length=30, verbose_name='Método')),
                ('seed', models.BigIntegerField(verbose_name='Semilla')),
                ('task_id', models.CharField(max_length=100, verbose_name='Tarea')),
                ('subject_id', models.CharField(max_length=20, verbose_name='Sujeto')),
                ('day', models.PositiveSmallIntegerField(verbose_name='Día')),
                ('condition', models.CharField(max_length=10, verbose_name='Condición')),
                ('fraction', models.FloatField(blank=True, null=True, verbose_name='Fracción de soporte')),
                ('n_pretrain', models.PositiveSmallIntegerField(blank=True, null=True, verbose_name='Sujetos de preentrenamiento')),
                ('epochs', models.PositiveSmallIntegerField(blank=True, null=True, verbose_name='Épocas de ajuste')),
                ('correct', models.PositiveIntegerField(verbose_name='Ventanas correctas')),
                ('total', models.PositiveIntegerField(verbose_name='Ventanas de consulta')),
                ('accuracy', models.FloatField(verbose_name='Precisión (%)')),
                ('run', models.ForeignKey(on_delete=django.db.models.deletion.CASCADE, related_name='task_results', to='harness.experimentrun', verbose_name='Corrida')),
            ],
            options={
                'verbose_name': 'Resultado por tarea',
                'verbose_name_plural': 'Resultados por tarea',
                'ordering': ['run', 'method', 'seed', 'task_id'],
            },
        ),
    ]
